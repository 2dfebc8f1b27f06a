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

// Ground-truth world model for testing the detector exactly.
//
// The oracle backends answer from scene graphs instead of pixels:
// reconstruction parses the caption into a scene (one object per phrase,
// laid out on a grid so that every stated direction holds exactly),
// grounding looks phrases up by head label, and embeddings are normalized
// feature-count vectors over (label, attributes). OracleDetect computes the
// penalties the pipeline must produce straight from the scene, without any
// backend round trip.

#ifndef HALLOC_ORACLE_H_
#define HALLOC_ORACLE_H_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "halloc/caption.h"
#include "halloc/detection.h"
#include "halloc/gateway.h"
#include "halloc/scene.h"

namespace halloc {

struct ObjectMention {
  PhraseSpan phrase;
  std::string label;  // lowercased head word
  std::set<std::string> attributes;  // lowercased modifier words
};

std::vector<ObjectMention> ParseMentions(const TokenSequence& seq,
                                         const std::vector<PhraseSpan>& phrases);

// Scene implied by a caption: one object per phrase, directions of the
// positional relations honored exactly.
SceneGraph LayoutCaption(const std::string& caption,
                         const PhraseExtractor& extractor);

struct OracleOptions {
  // Noise level. Each reconstruction omits every object independently with
  // probability sigma * drop_gain (capped at 1), jitters object centers with
  // standard deviation sigma * jitter_gain * grid_step, and every embedding
  // receives Gaussian noise of expected norm sigma * embed_gain before
  // renormalization. Zero gives exact answers.
  double sigma = 0.0;
  double drop_gain = 1.0;
  double jitter_gain = 0.5;
  double embed_gain = 1.0;
  int image_size = 64;
};

class OracleBackend : public TextToImageBackend,
                      public GroundingBackend,
                      public EmbeddingBackend {
 public:
  explicit OracleBackend(OracleOptions options = {},
                         const FeatureSpace& features = FeatureSpace::Default());

  // PNG raster of the scene carrying the scene JSON in a tEXt chunk.
  static ImageRef RenderScene(const SceneGraph& scene, int size = 64);

  void RegisterScene(const SceneGraph& scene);
  SceneGraph SceneOf(const ImageRef& image) const;

  std::vector<ImageRef> Generate(const std::string& prompt,
                                 std::span<const std::int64_t> seeds,
                                 int steps) override;
  std::vector<Detection> Ground(const ImageRef& image,
                                const std::vector<std::string>& phrases,
                                const GroundingThresholds& thresholds) override;
  std::vector<Embedding> Embed(const ImageRef& image,
                               std::span<const BBox> boxes) override;

  const OracleOptions& options() const { return options_; }

 private:
  std::uint64_t ImageKey(const ImageRef& image) const;

  OracleOptions options_;
  const FeatureSpace& features_;
  RuleBasedChunker chunker_;
  mutable std::mutex mu_;
  std::map<std::string, SceneGraph> registry_;
  mutable std::map<std::uint64_t, std::shared_ptr<const SceneGraph>> cache_;
};

// Template caption naming every object with its attributes and one
// positional relation per adjacent pair of the mention order. Seed 0 keeps
// the scene order; other seeds shuffle it.
std::string RenderCaption(const SceneGraph& scene, std::uint64_t seed = 0);

enum class CorruptionKind { kAddObject, kAlterAttribute, kFlipRelation };

std::string_view CorruptionKindName(CorruptionKind kind);
CorruptionKind CorruptionKindFromName(std::string_view name);

struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::kAddObject;
  // Object id for kAlterAttribute, relation index (in caption order) for
  // kFlipRelation, unused for kAddObject. -1 lets the seed choose.
  int target = -1;
  // New label for kAddObject, new attribute for kAlterAttribute. Empty lets
  // the seed choose.
  std::string payload;
};

// Injects exactly one hallucination; throws kInapplicable when the spec
// cannot apply (no relation to flip, label already present, ...).
std::string Corrupt(const SceneGraph& scene, const std::string& caption,
                    const CorruptionSpec& spec, std::uint64_t seed = 0,
                    const FeatureSpace& features = FeatureSpace::Default());

// Reference scorer. Throws kUnparseable for captions outside the template
// grammar: repeated labels, relations without a direction or relations that
// form a cycle.
DetectionReport OracleDetect(const SceneGraph& scene, const std::string& caption,
                             int k = 4,
                             const FeatureSpace& features = FeatureSpace::Default());

// Sum of all penalty values; r_rec is excluded.
double TotalPenalty(const DetectionReport& report);

struct FamilyCase {
  SceneGraph scene;
  std::string caption;
  std::optional<CorruptionSpec> corruption;  // nullopt: faithful
};

// Deterministic family of small scenes: objects placed along every
// self-avoiding grid walk of up to `max_objects` steps, crossed with
// `variants` label/attribute assignments (at most two attributes each).
std::vector<SceneGraph> EnumerateSceneFamily(
    int max_objects = 5, int variants = 8,
    const FeatureSpace& features = FeatureSpace::Default());

// Each scene with its faithful caption plus every single corruption:
// one added object, one altered attribute per object, one flip per relation.
std::vector<FamilyCase> EnumerateFamilyCases(
    const std::vector<SceneGraph>& scenes,
    const FeatureSpace& features = FeatureSpace::Default());

}  // namespace halloc

#endif  // HALLOC_ORACLE_H_
