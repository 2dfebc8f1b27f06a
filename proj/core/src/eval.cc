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

#include "halloc/eval.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "halloc/detection.h"
#include "halloc/error.h"
#include "json.hpp"

namespace halloc {
namespace {

using ordered_json = nlohmann::ordered_json;

// Runs fn(i) for i in [0, n) on up to `threads` workers.
template <typename Fn>
void ParallelFor(std::size_t n, int threads, Fn&& fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double Ratio(long num, long den, double empty) {
  return den == 0 ? empty : static_cast<double>(num) / static_cast<double>(den);
}

std::string KindKey(CorruptionKind kind) {
  switch (kind) {
    case CorruptionKind::kAddObject: return "obj";
    case CorruptionKind::kAlterAttribute: return "att";
    case CorruptionKind::kFlipRelation: return "rel";
  }
  return "obj";
}

void Tally(RateCount& c, bool win) {
  ++c.n;
  if (win) ++c.wins;
  c.rate = Ratio(c.wins, c.n, 0.0);
}

ordered_json RateJson(const RateCount& c) {
  return ordered_json{{"rate", c.rate}, {"wins", c.wins}, {"n", c.n}};
}

}  // namespace

ObjectVocabulary::ObjectVocabulary(
    const std::map<std::string, std::vector<std::string>>& synonyms) {
  for (const auto& [label, alternatives] : synonyms) {
    const std::string canonical = ToLower(label);
    if (canonical.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "empty vocabulary label");
    }
    labels_.insert(canonical);
    map_[canonical] = canonical;
  }
  for (const auto& [label, alternatives] : synonyms) {
    const std::string canonical = ToLower(label);
    for (const auto& alt : alternatives) {
      const std::string key = ToLower(alt);
      auto [it, inserted] = map_.emplace(key, canonical);
      if (!inserted && it->second != canonical) {
        throw Error(ErrorCode::kInvalidArgument,
                    "synonym '" + key + "' maps to both '" + it->second +
                        "' and '" + canonical + "'");
      }
    }
  }
}

ObjectVocabulary ObjectVocabulary::FromJson(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    std::map<std::string, std::vector<std::string>> synonyms;
    for (const auto& [label, alts] : doc.at("labels").items()) {
      synonyms[label] = alts.get<std::vector<std::string>>();
    }
    return ObjectVocabulary(synonyms);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("malformed object vocabulary: ") + e.what());
  }
}

ObjectVocabulary ObjectVocabulary::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open vocabulary " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return FromJson(buffer.str());
}

const ObjectVocabulary& ObjectVocabulary::Default() {
  static const ObjectVocabulary* vocab = [] {
    std::map<std::string, std::vector<std::string>> synonyms;
    for (const auto& label : FeatureSpace::Default().labels()) {
      synonyms[label] = {label + (label.back() == 'x' ? "es" : "s")};
    }
    return new ObjectVocabulary(synonyms);
  }();
  return *vocab;
}

std::optional<std::string> ObjectVocabulary::Canonical(std::string_view word) const {
  auto it = map_.find(ToLower(word));
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> ExtractMentionedObjects(const std::string& caption,
                                                 const ObjectVocabulary& vocab,
                                                 const PhraseExtractor& extractor) {
  const auto extracted = ExtractObjectPhrases(Tokenize(caption), extractor);
  std::vector<std::string> out;
  for (const auto& phrase : extracted.phrases) {
    auto label = vocab.Canonical(phrase.text);
    if (!label) label = vocab.Canonical(extracted.tokens[phrase.head_token].text);
    if (label) out.push_back(*label);
  }
  return out;
}

ChairResult Chair(const std::vector<ChairCaption>& captions,
                  const ObjectVocabulary& vocab) {
  if (captions.empty()) throw Error(ErrorCode::kEmptyInput, "no captions to score");
  ChairResult result;
  result.n_captions = static_cast<int>(captions.size());
  for (const auto& caption : captions) {
    std::set<std::string> truth;
    for (const auto& t : caption.truth) {
      auto label = vocab.Canonical(t);
      if (!label) {
        throw Error(ErrorCode::kInvalidArgument,
                    "ground-truth label '" + t + "' is not in the vocabulary");
      }
      truth.insert(*label);
    }
    std::set<std::string> mentioned;
    for (const auto& m : caption.mentions) {
      if (auto label = vocab.Canonical(m)) mentioned.insert(*label);
    }
    long hallucinated = 0;
    for (const auto& m : mentioned) {
      if (truth.contains(m)) {
        ++result.covered;
      } else {
        ++hallucinated;
      }
    }
    result.mentions += static_cast<long>(mentioned.size());
    result.hallucinated_mentions += hallucinated;
    result.truth += static_cast<long>(truth.size());
    if (hallucinated > 0) ++result.hallucinated_captions;
  }
  result.chair_s = Ratio(result.hallucinated_captions, result.n_captions, 0.0);
  result.chair_i = Ratio(result.hallucinated_mentions, result.mentions, 0.0);
  result.coverage = Ratio(result.covered, result.truth, 1.0);
  return result;
}

std::vector<ChairCaption> LoadChairCorpus(const std::string& path,
                                          const ObjectVocabulary& vocab,
                                          const PhraseExtractor& extractor) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open corpus " + path);
  std::vector<ChairCaption> out;
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto doc = nlohmann::json::parse(line);
      ChairCaption c;
      c.mentions = ExtractMentionedObjects(doc.at("caption").get<std::string>(),
                                           vocab, extractor);
      c.truth = doc.at("truth").get<std::vector<std::string>>();
      out.push_back(std::move(c));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument,
                  path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<ChairCaption> SyntheticChairCorpus(const std::vector<SceneGraph>& scenes,
                                               const ObjectVocabulary& vocab) {
  std::vector<ChairCaption> out;
  const RuleBasedChunker chunker;
  for (const auto& scene : scenes) {
    ChairCaption c;
    c.mentions = ExtractMentionedObjects(RenderCaption(scene, 0), vocab, chunker);
    for (const auto& o : scene.objects) c.truth.push_back(o.label);
    out.push_back(std::move(c));
  }
  return out;
}

WinRateResult WinRate(const std::vector<PairOutcome>& pairs) {
  WinRateResult result;
  for (const auto& p : pairs) {
    Tally(result.overall, p.Win());
    Tally(result.per_kind[p.kind], p.Win());
  }
  return result;
}

double PipelinePenalty(const SceneGraph& scene, const std::string& caption,
                       OracleBackend& backend, int k, std::int64_t seed_base) {
  BackendConfig config;
  config.reconstruction_count = k;
  config.seed_base = seed_base;
  // Non-owning handle: the caller keeps the backend alive.
  std::shared_ptr<OracleBackend> handle(std::shared_ptr<void>(), &backend);
  ModelGateway gateway(config, handle);
  const ImageRef original =
      OracleBackend::RenderScene(scene, backend.options().image_size);
  DetectOptions options;
  options.parallel = false;
  return TotalPenalty(
      Detect(caption, original, gateway, RuleBasedChunker{}, options));
}

WinRateResult FamilyWinRate(const std::vector<FamilyCase>& cases,
                            const PipelineRun& run) {
  OracleBackend backend(run.oracle);
  std::vector<double> penalty(cases.size());
  std::vector<std::int64_t> block(cases.size());
  std::int64_t scene_index = -1;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (!cases[i].corruption) ++scene_index;
    block[i] = run.seed_base + 64 * std::max<std::int64_t>(scene_index, 0);
  }
  ParallelFor(cases.size(), run.threads, [&](std::size_t i) {
    penalty[i] = PipelinePenalty(cases[i].scene, cases[i].caption, backend,
                                 run.k, block[i]);
  });
  std::vector<PairOutcome> pairs;
  std::optional<double> faithful;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (!cases[i].corruption) {
      faithful = penalty[i];
      continue;
    }
    if (!faithful) {
      throw Error(ErrorCode::kInvalidArgument,
                  "corrupted case precedes its faithful caption");
    }
    pairs.push_back({cases[i].corruption->kind, *faithful, penalty[i]});
  }
  return WinRate(pairs);
}

double StabilityCurve::PairedSe(std::size_t i, std::size_t j) const {
  const std::size_t n = wins.at(i).size();
  if (n < 2) return 0;
  double mean = 0;
  for (std::size_t t = 0; t < n; ++t) mean += double(wins[j][t]) - double(wins[i][t]);
  mean /= static_cast<double>(n);
  double var = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double d = double(wins[j][t]) - double(wins[i][t]) - mean;
    var += d * d;
  }
  var /= static_cast<double>(n - 1);
  return std::sqrt(var / static_cast<double>(n));
}

StabilityCurve RunStability(const std::vector<SceneGraph>& scenes,
                            const StabilityOptions& options,
                            const FeatureSpace& features) {
  if (scenes.empty()) throw Error(ErrorCode::kEmptyInput, "no scenes");
  if (options.ks.empty() || options.trials < 1) {
    throw Error(ErrorCode::kInvalidArgument, "stability needs k values and trials");
  }
  for (int k : options.ks) {
    if (k < 1 || k > 64) {
      throw Error(ErrorCode::kInvalidArgument, "k must lie in [1, 64]");
    }
  }
  std::vector<std::size_t> multi;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    if (scenes[i].objects.size() >= 2) multi.push_back(i);
  }
  static constexpr CorruptionKind kKinds[3] = {CorruptionKind::kAddObject,
                                               CorruptionKind::kAlterAttribute,
                                               CorruptionKind::kFlipRelation};
  OracleBackend backend(options.oracle, features);
  StabilityCurve curve;
  curve.wins.assign(options.ks.size(), std::vector<bool>(options.trials));
  std::vector<std::vector<char>> wins(options.ks.size(),
                                      std::vector<char>(options.trials));
  ParallelFor(options.trials, options.threads, [&](std::size_t t) {
    std::mt19937_64 rng(options.seed * 0x9e3779b97f4a7c15ULL + t);
    const CorruptionKind kind = kKinds[t % 3];
    // Relations need two objects.
    const bool need_pair = kind == CorruptionKind::kFlipRelation && !multi.empty();
    const SceneGraph& scene = need_pair ? scenes[multi[rng() % multi.size()]]
                                        : scenes[rng() % scenes.size()];
    const std::string faithful = RenderCaption(scene, 0);
    const std::string hallucinated =
        Corrupt(scene, faithful, CorruptionSpec{kind, -1, ""}, rng(), features);
    const std::int64_t block = 64 * static_cast<std::int64_t>(t);
    for (std::size_t i = 0; i < options.ks.size(); ++i) {
      const int k = options.ks[i];
      PairOutcome pair{kind, PipelinePenalty(scene, faithful, backend, k, block),
                       PipelinePenalty(scene, hallucinated, backend, k, block)};
      wins[i][t] = pair.Win();
    }
  });
  for (std::size_t i = 0; i < options.ks.size(); ++i) {
    StabilityPoint point;
    point.k = options.ks[i];
    for (int t = 0; t < options.trials; ++t) {
      curve.wins[i][t] = wins[i][t] != 0;
      Tally(point.win, curve.wins[i][t]);
    }
    const double p = point.win.rate;
    point.se = std::sqrt(p * (1 - p) / static_cast<double>(options.trials));
    curve.points.push_back(point);
  }
  return curve;
}

std::string MetricsReport::ToJson() const {
  ordered_json doc;
  doc["schema_version"] = 1;
  ordered_json ctx = ordered_json::object();
  for (const auto& [key, value] : context) ctx[key] = value;
  doc["context"] = ctx;
  if (chair) {
    doc["n_captions"] = chair->n_captions;
    doc["chair_s"] = chair->chair_s;
    doc["chair_i"] = chair->chair_i;
    doc["coverage"] = chair->coverage;
  }
  if (win_rate) {
    ordered_json per_kind = ordered_json::object();
    for (const auto& [kind, count] : win_rate->per_kind) {
      per_kind[KindKey(kind)] = RateJson(count);
    }
    ordered_json wr = RateJson(win_rate->overall);
    wr["per_kind"] = per_kind;
    doc["win_rate"] = wr;
  }
  if (stability) {
    ordered_json by_k = ordered_json::object();
    ordered_json points = ordered_json::array();
    for (const auto& p : stability->points) {
      by_k[std::to_string(p.k)] = p.win.rate;
      points.push_back(ordered_json{{"k", p.k},
                                    {"rate", p.win.rate},
                                    {"se", p.se},
                                    {"n", p.win.n}});
    }
    doc["win_rate_by_k"] = by_k;
    doc["stability"] = points;
  }
  return doc.dump(2) + "\n";
}

std::string MetricsReport::StabilityTable() const {
  std::ostringstream os;
  os << "k\trate\n";
  if (stability) {
    os << std::setprecision(6) << std::fixed;
    for (const auto& p : stability->points) os << p.k << "\t" << p.win.rate << "\n";
  }
  return os.str();
}

}  // namespace halloc
