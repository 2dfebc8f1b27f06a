/* Copyright 2026 The Halloc Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "halloc/service.h"

#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <thread>

#include "halloc/codec.h"
#include "halloc/detection.h"
#include "halloc/error.h"
#include "halloc/http_backend.h"
#include "halloc/oracle.h"
#include "halloc/reward.h"
#include "halloc/wire.h"
#include "httplib.h"
#include "json.hpp"

namespace halloc {

Scorer::Scorer(RunConfig config, std::shared_ptr<TextToImageBackend> t2i,
               std::shared_ptr<GroundingBackend> grounding,
               std::shared_ptr<EmbeddingBackend> embedding,
               std::vector<SceneGraph> scenes)
    : config_(std::move(config)),
      t2i_(std::move(t2i)),
      grounding_(std::move(grounding)),
      embedding_(std::move(embedding)),
      gateway_(config_.backend, t2i_, grounding_, embedding_) {
  for (auto& scene : scenes) {
    const std::string id = scene.id;
    if (!scenes_.emplace(id, std::move(scene)).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate scene id " + id);
    }
  }
}

std::unique_ptr<Scorer> Scorer::FromConfig(const RunConfig& config) {
  std::vector<SceneGraph> scenes;
  if (!config.scenes.empty()) scenes = LoadScenes(config.scenes);
  if (config.mode == BackendMode::kOracle) {
    auto oracle = std::make_shared<OracleBackend>(config.oracle);
    return std::make_unique<Scorer>(config, oracle, oracle, oracle, std::move(scenes));
  }
  auto http = std::make_shared<HttpBackend>(config.backend);
  return std::make_unique<Scorer>(config, http, http, http, std::move(scenes));
}

ImageRef Scorer::ResolveImage(const ImageSpec& spec) const {
  switch (spec.kind) {
    case ImageSpec::Kind::kPath:
      return ImageRef::FromFile(spec.value);
    case ImageSpec::Kind::kB64Png:
      return ImageRef::FromPng(Base64Decode(spec.value));
    case ImageSpec::Kind::kSceneId: {
      auto it = scenes_.find(spec.value);
      if (it == scenes_.end()) {
        throw Error(ErrorCode::kNotFound, "unknown scene id '" + spec.value + "'");
      }
      return OracleBackend::RenderScene(it->second, config_.oracle.image_size);
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown image reference kind");
}

ScoreRecordLine Scorer::Score(const ScoreRequest& request) {
  const auto start = std::chrono::steady_clock::now();
  const ImageRef image = ResolveImage(request.image);
  DetectOptions options;
  const DetectionReport report =
      Detect(request.caption, image, gateway_, chunker_, options);
  const std::size_t T = report.tokens.size();
  if (request.logp_policy.has_value() != request.logp_ref.has_value()) {
    throw Error(ErrorCode::kInvalidArgument,
                "logp_policy and logp_ref must be given together");
  }
  std::vector<double> logp_policy = request.logp_policy.value_or(std::vector<double>(T));
  std::vector<double> logp_ref = request.logp_ref.value_or(std::vector<double>(T));
  if (logp_policy.size() != T || logp_ref.size() != T) {
    throw Error(ErrorCode::kLengthMismatch,
                "caption has " + std::to_string(T) + " tokens but logp arrays have " +
                    std::to_string(logp_policy.size()) + " and " +
                    std::to_string(logp_ref.size()));
  }
  const RewardVector rewards =
      AssembleRewards(report, logp_policy, logp_ref, config_.reward);
  double timing_ms = 0;
  if (config_.record_timing) {
    timing_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  }
  return MakeScoreRecord(request.id, report, rewards, timing_ms);
}

std::string Scorer::ScoreLine(std::string_view line, bool* ok) {
  std::string id;
  try {
    const ScoreRequest request = ParseScoreRequest(line);
    id = request.id;
    std::string out = EncodeScoreRecord(Score(request));
    if (ok) *ok = true;
    return out;
  } catch (const Error& e) {
    if (ok) *ok = false;
    if (id.empty()) {
      // Keep the caller's id when the line is otherwise malformed.
      try {
        const auto doc = nlohmann::json::parse(line);
        if (doc.is_object() && doc.contains("id") && doc["id"].is_string()) {
          id = doc["id"].get<std::string>();
        }
      } catch (const nlohmann::json::exception&) {
      }
    }
    return EncodeErrorRecord(id, e);
  } catch (const std::exception& e) {
    if (ok) *ok = false;
    return EncodeErrorRecord(id, Error(ErrorCode::kInvalidArgument, e.what()));
  }
}

bool Scorer::Healthy() { return gateway_.Probe(); }

BatchResult ScoreManifest(Scorer& scorer, const std::string& manifest_path,
                          std::ostream& out) {
  std::ifstream in(manifest_path);
  if (!in) {
    throw Error(ErrorCode::kInvalidArgument, "cannot read manifest " + manifest_path);
  }
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    lines.push_back(std::move(line));
  }
  std::vector<std::string> results(lines.size());
  std::vector<char> ok(lines.size(), 0);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < lines.size(); i = next++) {
      bool line_ok = false;
      results[i] = scorer.ScoreLine(lines[i], &line_ok);
      ok[i] = line_ok;
    }
  };
  const int workers =
      std::max(1, std::min<int>(scorer.config().parallelism, static_cast<int>(lines.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  BatchResult result;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out << results[i] << "\n";
    ++result.lines;
    if (!ok[i]) ++result.failed;
  }
  out.flush();
  return result;
}

void MountScoreRoutes(httplib::Server& server, Scorer& scorer, bool model_routes) {
  MountJsonRoute(server, std::string(wire::kScorePath),
                 [&scorer](const std::string& body) {
                   return EncodeScoreRecord(scorer.Score(ParseScoreRequest(body)));
                 });
  server.Get(std::string(wire::kHealthPath),
             [&scorer](const httplib::Request&, httplib::Response& res) {
               if (scorer.Healthy()) {
                 res.status = 200;
                 res.set_content(R"({"status":"ok"})", "application/json");
               } else {
                 res.status = 503;
                 res.set_content(wire::Encode(wire::ErrorEnvelope{
                                     "transport", "a backend did not answer its probe"}),
                                 "application/json");
               }
             });
  if (model_routes) {
    MountModelRoutes(server, scorer.t2i(), scorer.grounding(), scorer.embedding());
  }
}

}  // namespace halloc
