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

// Client layer over the three external model capabilities used by the
// detector: text-to-image reconstruction, phrase grounding and region
// embedding. Backends are pluggable; ModelGateway enforces the contracts
// (counts, thresholds, unit norms), retries transport failures and caps the
// number of in-flight requests.

#ifndef HALLOC_GATEWAY_H_
#define HALLOC_GATEWAY_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <semaphore>
#include <span>
#include <string>
#include <vector>

namespace halloc {

struct Point {
  double x = 0;
  double y = 0;
  bool operator==(const Point&) const = default;
};

// Normalized box, 0 <= x0 < x1 <= 1 and 0 <= y0 < y1 <= 1.
struct BBox {
  double x0 = 0;
  double y0 = 0;
  double x1 = 1;
  double y1 = 1;

  // Throws kInvalidArgument when the ordering or range invariant fails.
  static BBox Make(double x0, double y0, double x1, double y1);
  static BBox Full() { return BBox{0, 0, 1, 1}; }

  Point Center() const { return {(x0 + x1) / 2, (y0 + y1) / 2}; }
  double Area() const { return (x1 - x0) * (y1 - y0); }
  bool operator==(const BBox&) const = default;
};

double IoU(const BBox& a, const BBox& b);

class ImageRef {
 public:
  enum class Source { kFilePath, kInlineBytes, kSyntheticScene };

  // Reads the PNG header from disk to learn the dimensions.
  static ImageRef FromFile(const std::string& path);
  // Validates `png` as a decodable PNG.
  static ImageRef FromPng(std::string png);
  static ImageRef FromSceneId(std::string scene_id, int width, int height);

  Source source() const { return source_; }
  int width() const { return width_; }
  int height() const { return height_; }
  // Path, PNG bytes or scene id depending on source().
  const std::string& value() const { return value_; }
  // PNG bytes for file and inline sources; throws kInvalidArgument for
  // synthetic scenes, which have no raster form until rendered.
  std::string PngBytes() const;

 private:
  ImageRef(Source source, std::string value, int width, int height);

  Source source_;
  std::string value_;
  int width_;
  int height_;
};

struct Detection {
  std::string phrase;
  BBox box;
  double score = 0;
};

struct Embedding {
  std::vector<double> values;
  std::size_t dim() const { return values.size(); }
};

// Standard cosine similarity clamped to [-1, 1]. Throws kLengthMismatch on
// unequal dimensions and kZeroVector if either vector is zero.
double Cosine(std::span<const double> a, std::span<const double> b);
inline double Cosine(const Embedding& a, const Embedding& b) {
  return Cosine(a.values, b.values);
}

struct GroundingThresholds {
  double box = 0.35;
  double text = 0.25;
};

struct BackendConfig {
  std::string t2i_url;
  std::string ground_url;
  std::string embed_url;
  int timeout_ms = 30000;
  int retries = 3;  // total attempts on transport errors
  int backoff_ms = 50;
  int reconstruction_count = 4;
  int inference_steps = 4;
  GroundingThresholds thresholds;
  // Reconstruction i uses seed_base + i.
  std::int64_t seed_base = 0;
  int max_in_flight = 64;

  // Throws kInvalidArgument when k < 1 or a threshold is outside (0, 1).
  void Validate() const;
  std::vector<std::int64_t> Seeds() const;
};

class TextToImageBackend {
 public:
  virtual ~TextToImageBackend() = default;
  virtual std::vector<ImageRef> Generate(const std::string& prompt,
                                         std::span<const std::int64_t> seeds,
                                         int steps) = 0;
  virtual bool Probe() { return true; }
};

class GroundingBackend {
 public:
  virtual ~GroundingBackend() = default;
  virtual std::vector<Detection> Ground(const ImageRef& image,
                                        const std::vector<std::string>& phrases,
                                        const GroundingThresholds& thresholds) = 0;
  virtual bool Probe() { return true; }
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual std::vector<Embedding> Embed(const ImageRef& image,
                                       std::span<const BBox> boxes) = 0;
  virtual bool Probe() { return true; }
};

class ModelGateway {
 public:
  ModelGateway(BackendConfig config,
               std::shared_ptr<TextToImageBackend> t2i,
               std::shared_ptr<GroundingBackend> grounding,
               std::shared_ptr<EmbeddingBackend> embedding);

  // Convenience for a single object implementing all three capabilities.
  template <typename Backend>
  ModelGateway(BackendConfig config, std::shared_ptr<Backend> backend)
      : ModelGateway(std::move(config), backend, backend, backend) {}

  const BackendConfig& config() const { return config_; }

  // Returns seeds.size() images in seed order.
  std::vector<ImageRef> Reconstruct(const std::string& caption,
                                    std::span<const std::int64_t> seeds);
  std::vector<Detection> Ground(const ImageRef& image,
                                const std::vector<std::string>& phrases);
  Embedding EmbedRegion(const ImageRef& image, const BBox& box);
  std::vector<Embedding> EmbedRegions(const ImageRef& image,
                                      std::span<const BBox> boxes);
  bool Probe();

  // True when `box` rounds to less than one pixel on `image`.
  static bool IsDegenerate(const ImageRef& image, const BBox& box);

 private:
  template <typename Fn>
  auto WithRetry(const char* what, Fn&& fn) -> decltype(fn());


  BackendConfig config_;
  std::shared_ptr<TextToImageBackend> t2i_;
  std::shared_ptr<GroundingBackend> grounding_;
  std::shared_ptr<EmbeddingBackend> embedding_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

}  // namespace halloc

#endif  // HALLOC_GATEWAY_H_
