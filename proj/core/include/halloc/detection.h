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

// Reference-free hallucination detector. A caption is reconstructed k times,
// its object phrases are grounded first in each reconstruction and then (if
// aligned in a majority of them) in the original image, and the aligned
// regions are scored:
//
//   p_obj  = -1 for a phrase aligned in the reconstructions but not in the
//            original image,
//   p_att  = (cos(emb_org(region), emb_rec(region)) - 1) / 2,
//   p_rel  = (cos(v_org, v_rec) - 1) / 2 on the positional token, where v is
//            the vector between the two region centers,
//   r_rec  = (cos(emb_org(image), emb_rec(image)) + 1) / 2.
//
// Per-reconstruction values are combined with the arithmetic mean over the
// reconstructions that produced a value.

#ifndef HALLOC_DETECTION_H_
#define HALLOC_DETECTION_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "halloc/caption.h"
#include "halloc/gateway.h"

namespace halloc {

// Aggregated att/rel penalties with magnitude at or below this are treated
// as zero and not reported.
inline constexpr double kPenaltyEpsilon = 1e-12;

enum class PenaltyKind { kObject, kAttribute, kRelation };

std::string_view PenaltyKindName(PenaltyKind kind);
PenaltyKind PenaltyKindFromName(std::string_view name);

struct AlignmentRecord {
  PhraseSpan phrase;
  std::vector<std::optional<BBox>> rec_boxes;  // one slot per reconstruction
  std::vector<std::optional<double>> rec_scores;
  bool rec_aligned = false;
  std::optional<BBox> org_box;  // only for rec-aligned phrases
  std::optional<double> org_score;
};

struct PenaltyRecord {
  int token = 0;
  PenaltyKind kind = PenaltyKind::kObject;
  double value = 0;
  std::vector<std::optional<double>> per_reconstruction;
};

struct DetectionReport {
  TokenSequence tokens;
  std::vector<AlignmentRecord> alignments;
  std::vector<PenaltyRecord> penalties;  // sorted by (token, kind)
  double r_rec = 0;
  int k = 0;
};

// Closed forms shared by the pipeline and the reference scorer.
inline double AttributePenalty(double cosine) { return (cosine - 1) / 2; }
inline double RelationPenalty(double cosine) { return (cosine - 1) / 2; }
inline double HolisticReward(double cosine) { return (cosine + 1) / 2; }

// cos of the angle between center(b2)-center(b1) in two frames; nullopt if
// either vector has zero length.
std::optional<double> RelationCosine(const BBox& org_first,
                                     const BBox& org_second,
                                     const BBox& rec_first,
                                     const BBox& rec_second);

// Mean of the present entries, nullopt when none are present.
std::optional<double> AggregateMean(
    std::span<const std::optional<double>> values);

// Number of reconstructions a phrase must align in: ceil(k / 2).
int MajorityThreshold(int k);

std::vector<AlignmentRecord> Align(ModelGateway& gateway,
                                   const std::vector<PhraseSpan>& phrases,
                                   const ImageRef& original,
                                   const std::vector<ImageRef>& reconstructions,
                                   bool parallel = false);

std::vector<PenaltyRecord> ScoreObjects(
    const std::vector<AlignmentRecord>& alignments);

std::vector<PenaltyRecord> ScoreAttributes(
    const std::vector<AlignmentRecord>& alignments, ModelGateway& gateway,
    const ImageRef& original, const std::vector<ImageRef>& reconstructions,
    bool parallel = false);

std::vector<PenaltyRecord> ScoreRelations(
    const std::vector<RelationCandidate>& candidates,
    const std::vector<AlignmentRecord>& alignments, int k);

double ComputeHolisticReward(ModelGateway& gateway, const ImageRef& original,
                             const std::vector<ImageRef>& reconstructions,
                             bool parallel = false);

struct DetectOptions {
  TokenizerOptions tokenizer;
  // Issue per-reconstruction backend calls concurrently.
  bool parallel = true;
};

// tokenize -> extract phrases -> pair relations -> reconstruct -> align ->
// score -> holistic reward. Errors carry the failing stage in the message.
DetectionReport Detect(const std::string& caption, const ImageRef& original,
                       ModelGateway& gateway, const PhraseExtractor& extractor,
                       const DetectOptions& options = {});

}  // namespace halloc

#endif  // HALLOC_DETECTION_H_
