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

#include "halloc/gateway.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "halloc/codec.h"
#include "halloc/error.h"

namespace halloc {
namespace {

bool InUnit(double v) { return v >= 0.0 && v <= 1.0; }

// Releases one in-flight slot on scope exit.
class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& sem) : sem_(sem) {
    sem_.acquire();
  }
  ~SlotGuard() { sem_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& sem_;
};

}  // namespace

BBox BBox::Make(double x0, double y0, double x1, double y1) {
  if (!(InUnit(x0) && InUnit(y0) && InUnit(x1) && InUnit(y1)) || !(x0 < x1) ||
      !(y0 < y1)) {
    std::ostringstream os;
    os << "invalid box [" << x0 << ", " << y0 << ", " << x1 << ", " << y1
       << "]";
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
  return BBox{x0, y0, x1, y1};
}

double IoU(const BBox& a, const BBox& b) {
  const double ix = std::max(0.0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
  const double iy = std::max(0.0, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
  const double inter = ix * iy;
  const double uni = a.Area() + b.Area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

ImageRef::ImageRef(Source source, std::string value, int width, int height)
    : source_(source), value_(std::move(value)), width_(width),
      height_(height) {
  if (width_ <= 0 || height_ <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "image dimensions must be > 0");
  }
}

ImageRef ImageRef::FromFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open image " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  PngImage info = DecodePng(buf.str());
  return ImageRef(Source::kFilePath, path, info.width, info.height);
}

ImageRef ImageRef::FromPng(std::string png) {
  PngImage info = DecodePng(png);
  return ImageRef(Source::kInlineBytes, std::move(png), info.width,
                  info.height);
}

ImageRef ImageRef::FromSceneId(std::string scene_id, int width, int height) {
  return ImageRef(Source::kSyntheticScene, std::move(scene_id), width, height);
}

std::string ImageRef::PngBytes() const {
  switch (source_) {
    case Source::kInlineBytes:
      return value_;
    case Source::kFilePath: {
      std::ifstream in(value_, std::ios::binary);
      if (!in) throw Error(ErrorCode::kNotFound, "cannot open image " + value_);
      std::stringstream buf;
      buf << in.rdbuf();
      return buf.str();
    }
    case Source::kSyntheticScene:
      break;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "synthetic scene " + value_ + " has no raster bytes");
}

double Cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "cosine of vectors with dimensions " +
                    std::to_string(a.size()) + " and " +
                    std::to_string(b.size()));
  }
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) {
    throw Error(ErrorCode::kZeroVector, "cosine of a zero vector");
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

void BackendConfig::Validate() const {
  if (reconstruction_count < 1) {
    throw Error(ErrorCode::kInvalidArgument, "reconstruction_count must be >= 1");
  }
  auto open_unit = [](double v) { return v > 0 && v < 1; };
  if (!open_unit(thresholds.box) || !open_unit(thresholds.text)) {
    throw Error(ErrorCode::kInvalidArgument,
                "grounding thresholds must lie in (0, 1)");
  }
  if (retries < 1 || max_in_flight < 1 || timeout_ms < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "retries, max_in_flight and timeout_ms must be positive");
  }
}

std::vector<std::int64_t> BackendConfig::Seeds() const {
  std::vector<std::int64_t> seeds(reconstruction_count);
  for (int i = 0; i < reconstruction_count; ++i) seeds[i] = seed_base + i;
  return seeds;
}

ModelGateway::ModelGateway(BackendConfig config,
                           std::shared_ptr<TextToImageBackend> t2i,
                           std::shared_ptr<GroundingBackend> grounding,
                           std::shared_ptr<EmbeddingBackend> embedding)
    : config_(std::move(config)),
      t2i_(std::move(t2i)),
      grounding_(std::move(grounding)),
      embedding_(std::move(embedding)) {
  config_.Validate();
  if (!t2i_ || !grounding_ || !embedding_) {
    throw Error(ErrorCode::kInvalidArgument, "gateway requires all backends");
  }
  in_flight_ =
      std::make_unique<std::counting_semaphore<>>(config_.max_in_flight);
}

template <typename Fn>
auto ModelGateway::WithRetry(const char* what, Fn&& fn) -> decltype(fn()) {
  int delay_ms = config_.backoff_ms;
  for (int attempt = 1;; ++attempt) {
    try {
      SlotGuard slot(*in_flight_);
      return fn();
    } catch (const Error& e) {
      if (!e.retryable() || attempt >= config_.retries) {
        Rethrow(e, std::string(what) + " (attempt " + std::to_string(attempt) +
                       ")");
      }
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
    delay_ms *= 2;
  }
}

std::vector<ImageRef> ModelGateway::Reconstruct(
    const std::string& caption, std::span<const std::int64_t> seeds) {
  if (caption.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "reconstruct: empty caption");
  }
  if (seeds.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "reconstruct: k must be >= 1");
  }
  auto images = WithRetry("t2i", [&] {
    return t2i_->Generate(caption, seeds, config_.inference_steps);
  });
  if (images.size() != seeds.size()) {
    throw Error(ErrorCode::kProtocol,
                "t2i returned " + std::to_string(images.size()) +
                    " images for " + std::to_string(seeds.size()) + " seeds");
  }
  return images;
}

std::vector<Detection> ModelGateway::Ground(
    const ImageRef& image, const std::vector<std::string>& phrases) {
  if (phrases.empty()) return {};
  for (const auto& p : phrases) {
    if (p.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "ground: empty phrase");
    }
  }
  auto raw = WithRetry("ground", [&] {
    return grounding_->Ground(image, phrases, config_.thresholds);
  });
  const std::set<std::string> requested(phrases.begin(), phrases.end());
  std::vector<Detection> out;
  out.reserve(raw.size());
  for (auto& d : raw) {
    if (!requested.contains(d.phrase)) {
      throw Error(ErrorCode::kProtocol,
                  "ground returned unrequested phrase '" + d.phrase + "'");
    }
    if (!(d.score >= 0 && d.score <= 1)) {
      throw Error(ErrorCode::kProtocol, "ground returned score outside [0,1]");
    }
    if (d.score < config_.thresholds.box) continue;
    out.push_back(std::move(d));
  }
  return out;
}

bool ModelGateway::IsDegenerate(const ImageRef& image, const BBox& box) {
  const long px0 = std::lround(box.x0 * image.width());
  const long px1 = std::lround(box.x1 * image.width());
  const long py0 = std::lround(box.y0 * image.height());
  const long py1 = std::lround(box.y1 * image.height());
  return px1 - px0 < 1 || py1 - py0 < 1;
}

std::vector<Embedding> ModelGateway::EmbedRegions(const ImageRef& image,
                                                  std::span<const BBox> boxes) {
  for (const BBox& b : boxes) {
    if (IsDegenerate(image, b)) {
      throw Error(ErrorCode::kDegenerateRegion,
                  "region crops to less than one pixel");
    }
  }
  if (boxes.empty()) return {};
  auto out = WithRetry("embed", [&] { return embedding_->Embed(image, boxes); });
  if (out.size() != boxes.size()) {
    throw Error(ErrorCode::kProtocol, "embed returned wrong number of vectors");
  }
  for (const auto& e : out) {
    double norm2 = 0;
    for (double v : e.values) norm2 += v * v;
    if (e.values.empty() || std::abs(std::sqrt(norm2) - 1.0) > 1e-6) {
      throw Error(ErrorCode::kProtocol, "embedding is not unit-normalized");
    }
    if (e.dim() != out.front().dim()) {
      throw Error(ErrorCode::kProtocol, "embeddings of mixed dimension");
    }
  }
  return out;
}

Embedding ModelGateway::EmbedRegion(const ImageRef& image, const BBox& box) {
  return EmbedRegions(image, std::span<const BBox>(&box, 1)).front();
}

bool ModelGateway::Probe() {
  try {
    return t2i_->Probe() && grounding_->Probe() && embedding_->Probe();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace halloc
