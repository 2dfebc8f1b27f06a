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

#include "halloc/scripted_backend.h"

#include <cmath>

#include "halloc/codec.h"
#include "halloc/error.h"

namespace halloc {
namespace {

constexpr const char* kTagKey = "halloc-tag";

std::vector<double> Normalized(std::vector<double> v) {
  double n = 0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n == 0) throw Error(ErrorCode::kZeroVector, "scripted zero embedding");
  for (double& x : v) x /= n;
  return v;
}

}  // namespace

ImageRef ScriptedBackend::MakeImage(const std::string& tag, int width,
                                    int height) {
  PngImage img;
  img.width = width;
  img.height = height;
  const auto h = Fnv1a64(tag);
  img.rgb.assign(static_cast<std::size_t>(width) * height * 3, 0);
  for (std::size_t i = 0; i < img.rgb.size(); ++i) {
    img.rgb[i] = static_cast<std::uint8_t>((h >> ((i % 3) * 8)) & 0xff);
  }
  img.text[kTagKey] = tag;
  return ImageRef::FromPng(EncodePng(img));
}

std::string ScriptedBackend::TagOf(const ImageRef& image) {
  if (image.source() == ImageRef::Source::kSyntheticScene) return image.value();
  PngImage info = DecodePng(image.PngBytes());
  auto it = info.text.find(kTagKey);
  if (it == info.text.end()) {
    throw Error(ErrorCode::kProtocol, "image carries no scripted tag");
  }
  return it->second;
}

void ScriptedBackend::AddDetection(const std::string& tag,
                                   const std::string& phrase, const BBox& box,
                                   double score) {
  std::lock_guard lock(mu_);
  detections_[tag].push_back(Detection{phrase, box, score});
}

void ScriptedBackend::SetEmbedding(const std::string& tag, const BBox& box,
                                   std::vector<double> values) {
  std::lock_guard lock(mu_);
  embeddings_.push_back({{tag, box}, Normalized(std::move(values))});
}

void ScriptedBackend::SetDefaultEmbedding(std::vector<double> values) {
  std::lock_guard lock(mu_);
  default_embedding_ = Normalized(std::move(values));
}

std::vector<ImageRef> ScriptedBackend::Generate(
    const std::string& /*prompt*/, std::span<const std::int64_t> seeds,
    int /*steps*/) {
  std::vector<ImageRef> out;
  for (auto seed : seeds) out.push_back(MakeImage(RecTag(seed)));
  return out;
}

std::vector<Detection> ScriptedBackend::Ground(
    const ImageRef& image, const std::vector<std::string>& phrases,
    const GroundingThresholds& thresholds) {
  const std::string tag = TagOf(image);
  std::lock_guard lock(mu_);
  ++ground_calls_;
  std::vector<Detection> out;
  auto it = detections_.find(tag);
  if (it == detections_.end()) return out;
  for (const auto& d : it->second) {
    if (d.score < thresholds.box) continue;
    for (const auto& p : phrases) {
      if (p == d.phrase) {
        out.push_back(d);
        break;
      }
    }
  }
  return out;
}

std::vector<Embedding> ScriptedBackend::Embed(const ImageRef& image,
                                              std::span<const BBox> boxes) {
  const std::string tag = TagOf(image);
  std::lock_guard lock(mu_);
  std::vector<Embedding> out;
  for (const BBox& box : boxes) {
    const std::vector<double>* hit = nullptr;
    for (const auto& [key, v] : embeddings_) {
      if (key.first == tag && key.second == box) hit = &v;
    }
    if (hit == nullptr) {
      if (default_embedding_.empty()) {
        throw Error(ErrorCode::kProtocol, "no scripted embedding for " + tag);
      }
      hit = &default_embedding_;
    }
    out.push_back(Embedding{*hit});
  }
  return out;
}

int ScriptedBackend::ground_calls() const {
  std::lock_guard lock(mu_);
  return ground_calls_;
}

}  // namespace halloc
