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

#ifndef HALLOC_SCRIPTED_BACKEND_H_
#define HALLOC_SCRIPTED_BACKEND_H_

#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "halloc/gateway.h"

namespace halloc {

// Deterministic mock whose answers are set up by the caller. Images are
// small PNGs identified by a tag stored in a tEXt chunk; reconstructions of
// any prompt are tagged "rec/<seed>".
class ScriptedBackend : public TextToImageBackend,
                        public GroundingBackend,
                        public EmbeddingBackend {
 public:
  static ImageRef MakeImage(const std::string& tag, int width = 64,
                            int height = 64);
  static std::string TagOf(const ImageRef& image);
  static std::string RecTag(std::int64_t seed) {
    return "rec/" + std::to_string(seed);
  }

  void AddDetection(const std::string& tag, const std::string& phrase,
                    const BBox& box, double score);
  // Stored normalized.
  void SetEmbedding(const std::string& tag, const BBox& box,
                    std::vector<double> values);
  // Used when no scripted embedding matches; unset means protocol error.
  void SetDefaultEmbedding(std::vector<double> values);

  std::vector<ImageRef> Generate(const std::string& prompt,
                                 std::span<const std::int64_t> seeds,
                                 int steps) override;
  std::vector<Detection> Ground(const ImageRef& image,
                                const std::vector<std::string>& phrases,
                                const GroundingThresholds& thresholds) override;
  std::vector<Embedding> Embed(const ImageRef& image,
                               std::span<const BBox> boxes) override;

  int ground_calls() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::vector<Detection>> detections_;
  std::vector<std::pair<std::pair<std::string, BBox>, std::vector<double>>>
      embeddings_;
  std::vector<double> default_embedding_;
  int ground_calls_ = 0;
};

}  // namespace halloc

#endif  // HALLOC_SCRIPTED_BACKEND_H_
