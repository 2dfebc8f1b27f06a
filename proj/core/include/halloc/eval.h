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

// Evaluation harness: CHAIR metrics over object mentions, the win rate of
// rewards over (faithful, hallucinated) caption pairs and the stability of
// the win rate as a function of the number of reconstructions.

#ifndef HALLOC_EVAL_H_
#define HALLOC_EVAL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "halloc/caption.h"
#include "halloc/oracle.h"
#include "halloc/scene.h"

namespace halloc {

// Canonical object labels plus a synonym map onto them. Every canonical
// label maps to itself.
class ObjectVocabulary {
 public:
  // `synonyms` maps each canonical label to its alternative spellings.
  explicit ObjectVocabulary(
      const std::map<std::string, std::vector<std::string>>& synonyms);

  // {"labels": {"dog": ["puppy", "dogs"], ...}}
  static ObjectVocabulary FromJson(std::string_view text);
  static ObjectVocabulary Load(const std::string& path);
  // The oracle feature-space labels with plural forms.
  static const ObjectVocabulary& Default();

  // Canonical label for a (case-insensitive) word or phrase, if known.
  std::optional<std::string> Canonical(std::string_view word) const;
  const std::set<std::string>& labels() const { return labels_; }
  const std::map<std::string, std::string>& synonym_map() const { return map_; }

 private:
  std::map<std::string, std::string> map_;
  std::set<std::string> labels_;
};

// Canonical labels of the object phrases of `caption`, in caption order.
// A phrase is matched by its full text first, then by its head word.
// Phrases outside the vocabulary are dropped.
std::vector<std::string> ExtractMentionedObjects(
    const std::string& caption, const ObjectVocabulary& vocab,
    const PhraseExtractor& extractor);

struct ChairCaption {
  std::vector<std::string> mentions;  // raw mention strings
  std::vector<std::string> truth;     // ground-truth labels
};

struct ChairResult {
  double chair_s = 0;
  double chair_i = 0;
  double coverage = 0;
  int n_captions = 0;
  long hallucinated_captions = 0;
  long hallucinated_mentions = 0;
  long mentions = 0;
  long covered = 0;
  long truth = 0;
};

// Set semantics per caption after canonicalization:
//   chair_s  = captions with a hallucinated object / captions,
//   chair_i  = hallucinated objects / mentioned objects,
//   coverage = mentioned true objects / true objects.
// Mentions outside the vocabulary are ignored. Throws kEmptyInput for no
// captions and kInvalidArgument when a truth label is not in `vocab`.
// Ratios with an empty denominator are 0 (chair_i) and 1 (coverage).
ChairResult Chair(const std::vector<ChairCaption>& captions,
                  const ObjectVocabulary& vocab);

// Reads one {"caption": str, "truth": [str]} object per line and extracts
// the caption mentions.
std::vector<ChairCaption> LoadChairCorpus(const std::string& path,
                                          const ObjectVocabulary& vocab,
                                          const PhraseExtractor& extractor);

// Faithful template captions of `scenes` with their labels as truth.
std::vector<ChairCaption> SyntheticChairCorpus(const std::vector<SceneGraph>& scenes,
                                               const ObjectVocabulary& vocab);

struct PairOutcome {
  CorruptionKind kind = CorruptionKind::kAddObject;
  double faithful_penalty = 0;
  double hallucinated_penalty = 0;
  // Strictly larger penalty magnitude on the hallucinated caption; ties lose.
  bool Win() const { return hallucinated_penalty < faithful_penalty; }
};

struct RateCount {
  double rate = 0;
  long wins = 0;
  long n = 0;
};

struct WinRateResult {
  RateCount overall;
  std::map<CorruptionKind, RateCount> per_kind;
};

WinRateResult WinRate(const std::vector<PairOutcome>& pairs);

struct PipelineRun {
  OracleOptions oracle;
  int k = 4;
  // Trial t reconstructs with seeds seed_base + 64 * t + i, so runs with
  // different k share their leading seeds.
  std::int64_t seed_base = 0;
  int threads = 0;  // 0: hardware concurrency
};

// Total pipeline penalty of `caption` against the rendered `scene` with
// oracle backends.
double PipelinePenalty(const SceneGraph& scene, const std::string& caption,
                       OracleBackend& backend, int k, std::int64_t seed_base);

// Win rate of the pipeline over every corrupted case of a scene family.
WinRateResult FamilyWinRate(const std::vector<FamilyCase>& cases,
                            const PipelineRun& run);

struct StabilityOptions {
  OracleOptions oracle{.sigma = 0.15};
  std::vector<int> ks = {1, 2, 4};
  int trials = 1000;
  std::uint64_t seed = 0;
  int threads = 0;
};

struct StabilityPoint {
  int k = 0;
  RateCount win;
  double se = 0;  // binomial standard error of the rate
};

struct StabilityCurve {
  std::vector<StabilityPoint> points;
  // wins[i][t]: trial t won with ks[i] reconstructions.
  std::vector<std::vector<bool>> wins;

  // Standard error of rate(j) - rate(i) over the paired trials.
  double PairedSe(std::size_t i, std::size_t j) const;
};

// Monte Carlo win rate for each k. Trial t draws a scene, a corruption kind
// (cycling through the three kinds) and a reconstruction seed block; all k
// share the trial's draws and leading seeds (common random numbers).
StabilityCurve RunStability(const std::vector<SceneGraph>& scenes,
                            const StabilityOptions& options,
                            const FeatureSpace& features = FeatureSpace::Default());

struct MetricsReport {
  std::optional<ChairResult> chair;
  std::optional<WinRateResult> win_rate;
  std::optional<StabilityCurve> stability;
  std::map<std::string, std::string> context;  // run parameters

  std::string ToJson() const;
  // "k\trate" rows for plotting, with a header line.
  std::string StabilityTable() const;
};

}  // namespace halloc

#endif  // HALLOC_EVAL_H_
