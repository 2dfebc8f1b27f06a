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

#include "halloc/detection.h"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <tuple>

#include "halloc/error.h"

namespace halloc {
namespace {

// Runs fn(0..n-1), concurrently if requested. Results are consumed by the
// caller in index order, so output never depends on completion order.
template <typename Fn>
void ForEachReconstruction(int n, bool parallel, Fn&& fn) {
  if (!parallel || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> jobs;
  jobs.reserve(n);
  for (int i = 0; i < n; ++i) {
    jobs.push_back(std::async(std::launch::async, [&fn, i] { fn(i); }));
  }
  std::exception_ptr first_error;
  for (auto& job : jobs) {
    try {
      job.get();
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

// Best detection per phrase text: highest score, earliest on ties.
std::map<std::string, Detection> BestByPhrase(
    const std::vector<Detection>& detections) {
  std::map<std::string, Detection> best;
  for (const auto& d : detections) {
    auto it = best.find(d.phrase);
    if (it == best.end() || d.score > it->second.score) best[d.phrase] = d;
  }
  return best;
}

void SortRecords(std::vector<PenaltyRecord>& records) {
  std::sort(records.begin(), records.end(),
            [](const PenaltyRecord& a, const PenaltyRecord& b) {
              return std::tie(a.token, a.kind) < std::tie(b.token, b.kind);
            });
}

template <typename Fn>
auto Stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    Rethrow(e, name);
  }
}

}  // namespace

std::string_view PenaltyKindName(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::kObject: return "obj";
    case PenaltyKind::kAttribute: return "att";
    case PenaltyKind::kRelation: return "rel";
  }
  return "obj";
}

PenaltyKind PenaltyKindFromName(std::string_view name) {
  if (name == "obj") return PenaltyKind::kObject;
  if (name == "att") return PenaltyKind::kAttribute;
  if (name == "rel") return PenaltyKind::kRelation;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown penalty kind '" + std::string(name) + "'");
}

std::optional<double> RelationCosine(const BBox& org_first,
                                     const BBox& org_second,
                                     const BBox& rec_first,
                                     const BBox& rec_second) {
  const Point a0 = org_first.Center(), a1 = org_second.Center();
  const Point b0 = rec_first.Center(), b1 = rec_second.Center();
  const double v_org[2] = {a1.x - a0.x, a1.y - a0.y};
  const double v_rec[2] = {b1.x - b0.x, b1.y - b0.y};
  if ((v_org[0] == 0 && v_org[1] == 0) || (v_rec[0] == 0 && v_rec[1] == 0)) {
    return std::nullopt;
  }
  return Cosine(v_org, v_rec);
}

std::optional<double> AggregateMean(
    std::span<const std::optional<double>> values) {
  double sum = 0;
  int count = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

int MajorityThreshold(int k) { return (k + 1) / 2; }

std::vector<AlignmentRecord> Align(
    ModelGateway& gateway, const std::vector<PhraseSpan>& phrases,
    const ImageRef& original, const std::vector<ImageRef>& reconstructions,
    bool parallel) {
  const int k = static_cast<int>(reconstructions.size());
  if (k < 1) {
    throw Error(ErrorCode::kInvalidArgument, "align needs >= 1 reconstruction");
  }
  std::vector<AlignmentRecord> out(phrases.size());
  std::vector<std::string> texts;
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    out[i].phrase = phrases[i];
    out[i].rec_boxes.assign(k, std::nullopt);
    out[i].rec_scores.assign(k, std::nullopt);
    texts.push_back(phrases[i].text);
  }
  if (phrases.empty()) return out;

  std::vector<std::map<std::string, Detection>> per_rec(k);
  ForEachReconstruction(k, parallel, [&](int j) {
    try {
      per_rec[j] = BestByPhrase(gateway.Ground(reconstructions[j], texts));
    } catch (const Error& e) {
      Rethrow(e, "grounding reconstruction " + std::to_string(j));
    }
  });

  std::vector<std::string> org_query;
  for (auto& rec : out) {
    int hits = 0;
    for (int j = 0; j < k; ++j) {
      auto it = per_rec[j].find(rec.phrase.text);
      if (it == per_rec[j].end()) continue;
      rec.rec_boxes[j] = it->second.box;
      rec.rec_scores[j] = it->second.score;
      ++hits;
    }
    rec.rec_aligned = hits >= MajorityThreshold(k);
    if (rec.rec_aligned &&
        std::find(org_query.begin(), org_query.end(), rec.phrase.text) ==
            org_query.end()) {
      org_query.push_back(rec.phrase.text);
    }
  }
  if (org_query.empty()) return out;

  std::map<std::string, Detection> org_best;
  try {
    org_best = BestByPhrase(gateway.Ground(original, org_query));
  } catch (const Error& e) {
    Rethrow(e, "grounding original image");
  }
  for (auto& rec : out) {
    if (!rec.rec_aligned) continue;
    auto it = org_best.find(rec.phrase.text);
    if (it == org_best.end()) continue;
    rec.org_box = it->second.box;
    rec.org_score = it->second.score;
  }
  return out;
}

std::vector<PenaltyRecord> ScoreObjects(
    const std::vector<AlignmentRecord>& alignments) {
  std::vector<PenaltyRecord> out;
  for (const auto& a : alignments) {
    if (!a.rec_aligned || a.org_box) continue;
    PenaltyRecord r;
    r.token = a.phrase.head_token;
    r.kind = PenaltyKind::kObject;
    r.value = -1.0;
    for (const auto& box : a.rec_boxes) {
      r.per_reconstruction.push_back(box ? std::optional<double>(-1.0)
                                         : std::nullopt);
    }
    out.push_back(std::move(r));
  }
  SortRecords(out);
  return out;
}

std::vector<PenaltyRecord> ScoreAttributes(
    const std::vector<AlignmentRecord>& alignments, ModelGateway& gateway,
    const ImageRef& original, const std::vector<ImageRef>& reconstructions,
    bool parallel) {
  const int k = static_cast<int>(reconstructions.size());
  std::vector<const AlignmentRecord*> scored;
  std::vector<BBox> org_boxes;
  for (const auto& a : alignments) {
    if (!a.org_box || ModelGateway::IsDegenerate(original, *a.org_box)) {
      continue;
    }
    scored.push_back(&a);
    org_boxes.push_back(*a.org_box);
  }
  if (scored.empty()) return {};
  const std::vector<Embedding> org_emb =
      gateway.EmbedRegions(original, org_boxes);

  // cosines[j][i]: reconstruction j, scored phrase i.
  std::vector<std::vector<std::optional<double>>> cosines(
      k, std::vector<std::optional<double>>(scored.size()));
  ForEachReconstruction(k, parallel, [&](int j) {
    std::vector<BBox> boxes;
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < scored.size(); ++i) {
      const auto& box = scored[i]->rec_boxes[j];
      if (!box || ModelGateway::IsDegenerate(reconstructions[j], *box)) continue;
      boxes.push_back(*box);
      slots.push_back(i);
    }
    if (boxes.empty()) return;
    const auto rec_emb = gateway.EmbedRegions(reconstructions[j], boxes);
    for (std::size_t n = 0; n < slots.size(); ++n) {
      cosines[j][slots[n]] = Cosine(org_emb[slots[n]], rec_emb[n]);
    }
  });

  std::vector<PenaltyRecord> out;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    PenaltyRecord r;
    r.token = scored[i]->phrase.head_token;
    r.kind = PenaltyKind::kAttribute;
    for (int j = 0; j < k; ++j) {
      r.per_reconstruction.push_back(
          cosines[j][i] ? std::optional<double>(AttributePenalty(*cosines[j][i]))
                        : std::nullopt);
    }
    auto mean = AggregateMean(r.per_reconstruction);
    if (!mean || std::abs(*mean) <= kPenaltyEpsilon) continue;
    r.value = *mean;
    out.push_back(std::move(r));
  }
  SortRecords(out);
  return out;
}

std::vector<PenaltyRecord> ScoreRelations(
    const std::vector<RelationCandidate>& candidates,
    const std::vector<AlignmentRecord>& alignments, int k) {
  auto find = [&](const PhraseSpan& p) -> const AlignmentRecord* {
    for (const auto& a : alignments) {
      if (a.phrase.head_token == p.head_token) return &a;
    }
    return nullptr;
  };
  std::vector<PenaltyRecord> out;
  for (const auto& c : candidates) {
    const AlignmentRecord* first = find(c.first);
    const AlignmentRecord* second = find(c.second);
    if (!first || !second || !first->org_box || !second->org_box) continue;
    PenaltyRecord r;
    r.token = c.positional_token;
    r.kind = PenaltyKind::kRelation;
    for (int j = 0; j < k; ++j) {
      std::optional<double> p;
      if (first->rec_boxes[j] && second->rec_boxes[j]) {
        auto cos = RelationCosine(*first->org_box, *second->org_box,
                                  *first->rec_boxes[j], *second->rec_boxes[j]);
        if (cos) p = RelationPenalty(*cos);
      }
      r.per_reconstruction.push_back(p);
    }
    auto mean = AggregateMean(r.per_reconstruction);
    if (!mean || std::abs(*mean) <= kPenaltyEpsilon) continue;
    r.value = *mean;
    out.push_back(std::move(r));
  }
  SortRecords(out);
  return out;
}

double ComputeHolisticReward(ModelGateway& gateway, const ImageRef& original,
                             const std::vector<ImageRef>& reconstructions,
                             bool parallel) {
  const int k = static_cast<int>(reconstructions.size());
  if (k < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "holistic reward needs >= 1 reconstruction");
  }
  const Embedding org = gateway.EmbedRegion(original, BBox::Full());
  std::vector<double> rewards(k);
  ForEachReconstruction(k, parallel, [&](int j) {
    rewards[j] = HolisticReward(
        Cosine(org, gateway.EmbedRegion(reconstructions[j], BBox::Full())));
  });
  double sum = 0;
  for (double r : rewards) sum += r;
  return std::clamp(sum / k, 0.0, 1.0);
}

DetectionReport Detect(const std::string& caption, const ImageRef& original,
                       ModelGateway& gateway, const PhraseExtractor& extractor,
                       const DetectOptions& options) {
  DetectionReport report;
  const bool par = options.parallel;
  const TokenSequence seq =
      Stage("tokenize", [&] { return Tokenize(caption, options.tokenizer); });
  ExtractedPhrases extracted =
      Stage("extract_phrases", [&] { return ExtractObjectPhrases(seq, extractor); });
  const auto candidates = PairRelations(extracted.tokens, extracted.phrases);
  report.tokens = std::move(extracted.tokens);

  const auto seeds = gateway.config().Seeds();
  report.k = static_cast<int>(seeds.size());
  const auto recs =
      Stage("reconstruct", [&] { return gateway.Reconstruct(caption, seeds); });
  report.alignments = Stage("align", [&] {
    return Align(gateway, extracted.phrases, original, recs, par);
  });

  auto obj = ScoreObjects(report.alignments);
  auto att = Stage("score_attributes", [&] {
    return ScoreAttributes(report.alignments, gateway, original, recs, par);
  });
  auto rel = ScoreRelations(candidates, report.alignments, report.k);
  report.penalties = std::move(obj);
  report.penalties.insert(report.penalties.end(), att.begin(), att.end());
  report.penalties.insert(report.penalties.end(), rel.begin(), rel.end());
  SortRecords(report.penalties);
  report.r_rec = Stage("holistic_reward", [&] {
    return ComputeHolisticReward(gateway, original, recs, par);
  });
  return report;
}

}  // namespace halloc
