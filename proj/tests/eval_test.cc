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
#include <cmath>
#include <random>
#include <set>

#include "gtest/gtest.h"
#include "halloc/error.h"
#include "halloc/schema.h"
#include "json.hpp"

namespace halloc {
namespace {

ObjectVocabulary Animals() {
  return ObjectVocabulary({{"dog", {"puppy", "dogs"}},
                           {"cat", {"kitten", "cats"}},
                           {"bird", {"birds"}},
                           {"horse", {}}});
}

// Counts straight from the definitions: canonicalize, dedupe per caption,
// count.
ChairResult BruteForceChair(const std::vector<ChairCaption>& captions,
                            const ObjectVocabulary& vocab) {
  ChairResult r;
  r.n_captions = static_cast<int>(captions.size());
  for (const auto& c : captions) {
    std::set<std::string> said, truth(c.truth.begin(), c.truth.end());
    for (const auto& m : c.mentions) {
      if (auto label = vocab.Canonical(m)) said.insert(*label);
    }
    long bad = 0;
    for (const auto& s : said) bad += !truth.count(s);
    r.hallucinated_captions += bad > 0;
    r.hallucinated_mentions += bad;
    r.mentions += static_cast<long>(said.size());
    r.truth += static_cast<long>(truth.size());
    r.covered += static_cast<long>(said.size()) - bad;
  }
  r.chair_s = static_cast<double>(r.hallucinated_captions) / r.n_captions;
  r.chair_i = r.mentions ? static_cast<double>(r.hallucinated_mentions) / r.mentions : 0.0;
  r.coverage = r.truth ? static_cast<double>(r.covered) / r.truth : 1.0;
  return r;
}

std::vector<ChairCaption> RandomCorpus(std::mt19937_64& rng) {
  const std::vector<std::string> words = {"dog", "puppy", "dogs", "cat", "kitten",
                                          "cats", "bird", "horse", "zebra"};
  const std::vector<std::string> labels = {"dog", "cat", "bird", "horse"};
  std::vector<ChairCaption> corpus(1 + rng() % 12);
  for (auto& c : corpus) {
    for (int i = rng() % 6; i > 0; --i) c.mentions.push_back(words[rng() % words.size()]);
    for (const auto& l : labels) {
      if (rng() % 2) c.truth.push_back(l);
    }
  }
  return corpus;
}

void ExpectSameChair(const ChairResult& a, const ChairResult& b) {
  EXPECT_DOUBLE_EQ(a.chair_s, b.chair_s);
  EXPECT_DOUBLE_EQ(a.chair_i, b.chair_i);
  EXPECT_DOUBLE_EQ(a.coverage, b.coverage);
  EXPECT_EQ(a.mentions, b.mentions);
  EXPECT_EQ(a.hallucinated_mentions, b.hallucinated_mentions);
}

TEST(VocabularyTest, CanonicalizesSynonyms) {
  const auto vocab = Animals();
  EXPECT_EQ(*vocab.Canonical("Puppy"), "dog");
  EXPECT_EQ(*vocab.Canonical("dog"), "dog");
  EXPECT_EQ(*vocab.Canonical("horse"), "horse");
  EXPECT_FALSE(vocab.Canonical("zebra").has_value());
  for (const auto& label : vocab.labels()) EXPECT_EQ(vocab.synonym_map().at(label), label);
  const auto parsed = ObjectVocabulary::FromJson(R"({"labels": {"dog": ["puppy"]}})");
  EXPECT_EQ(*parsed.Canonical("puppy"), "dog");
  EXPECT_THROW(ObjectVocabulary::FromJson(R"({"dog": ["puppy"]})"), Error);
  EXPECT_EQ(*ObjectVocabulary::Default().Canonical("boxes"), "box");
}

TEST(VocabularyTest, ShippedFileLoads) {
  const auto vocab = ObjectVocabulary::Load(std::string(HALLOC_DATA_DIR) +
                                            "/object_vocabulary.json");
  EXPECT_FALSE(vocab.labels().empty());
  for (const auto& label : ObjectVocabulary::Default().labels()) {
    EXPECT_TRUE(vocab.Canonical(label).has_value()) << label;
  }
}

TEST(ChairTest, DefinitionExamples) {
  const auto vocab = Animals();
  auto r = Chair({{{"dog", "cat"}, {"dog"}}}, vocab);
  EXPECT_EQ(r.chair_s, 1);
  EXPECT_EQ(r.chair_i, 0.5);
  EXPECT_EQ(r.coverage, 1);

  r = Chair({{{"dog"}, {"dog", "cat"}}, {{"cat"}, {"cat"}}}, vocab);
  EXPECT_EQ(r.chair_s, 0);
  EXPECT_EQ(r.chair_i, 0);
  EXPECT_EQ(r.coverage, 2.0 / 3.0);

  // Two captions, one naming three objects of which one is absent.
  r = Chair({{{"dog", "cat", "bird"}, {"dog", "cat"}}, {{"horse"}, {"horse"}}}, vocab);
  EXPECT_EQ(r.chair_s, 0.5);
  EXPECT_EQ(r.chair_i, 1.0 / 4.0);
}

TEST(ChairTest, EdgeCases) {
  const auto vocab = Animals();
  try {
    Chair({}, vocab);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
  }
  try {
    Chair({{{"dog"}, {"unicorn"}}}, vocab);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
  const auto r = Chair({{{}, {}}, {{"zebra"}, {}}}, vocab);
  EXPECT_EQ(r.chair_i, 0);
  EXPECT_EQ(r.coverage, 1);
  EXPECT_EQ(r.chair_s, 0);
}

TEST(ChairTest, MatchesBruteForceOnRandomCorpora) {
  std::mt19937_64 rng(31);
  const auto vocab = Animals();
  for (int trial = 0; trial < 1000; ++trial) {
    const auto corpus = RandomCorpus(rng);
    ExpectSameChair(Chair(corpus, vocab), BruteForceChair(corpus, vocab));
  }
}

TEST(ChairTest, PermutationInvariant) {
  std::mt19937_64 rng(37);
  const auto vocab = Animals();
  for (int trial = 0; trial < 200; ++trial) {
    auto corpus = RandomCorpus(rng);
    const auto before = Chair(corpus, vocab);
    std::shuffle(corpus.begin(), corpus.end(), rng);
    ExpectSameChair(Chair(corpus, vocab), before);
  }
}

TEST(ChairTest, RedundantSynonymChangesNothing) {
  std::mt19937_64 rng(41);
  const auto vocab = Animals();
  for (int trial = 0; trial < 200; ++trial) {
    auto corpus = RandomCorpus(rng);
    const auto before = Chair(corpus, vocab);
    for (auto& c : corpus) {
      std::vector<std::string> extra;
      for (const auto& m : c.mentions) {
        const auto label = vocab.Canonical(m);
        if (label == "dog") extra.push_back("puppy");
        if (label == "cat") extra.push_back("kitten");
      }
      c.mentions.insert(c.mentions.end(), extra.begin(), extra.end());
    }
    const auto after = Chair(corpus, vocab);
    EXPECT_DOUBLE_EQ(after.chair_i, before.chair_i);
    EXPECT_DOUBLE_EQ(after.coverage, before.coverage);
  }
}

TEST(ChairTest, MentionsComeFromPhraseHeads) {
  const RuleBasedChunker chunker;
  const auto mentions = ExtractMentionedObjects(
      "Two small dogs sit next to a wooden chair. A zebra runs.", ObjectVocabulary::Default(),
      chunker);
  EXPECT_EQ(mentions, (std::vector<std::string>{"dog", "chair"}));
}

TEST(ChairTest, SyntheticCorpusIsFaithful) {
  const auto corpus =
      SyntheticChairCorpus(EnumerateSceneFamily(3, 2), ObjectVocabulary::Default());
  const auto r = Chair(corpus, ObjectVocabulary::Default());
  EXPECT_EQ(r.chair_s, 0);
  EXPECT_EQ(r.chair_i, 0);
  EXPECT_EQ(r.coverage, 1);
}

TEST(ChairTest, LoadsShippedCorpus) {
  const RuleBasedChunker chunker;
  const auto corpus = LoadChairCorpus(std::string(HALLOC_DATA_DIR) + "/chair_corpus.jsonl",
                                      ObjectVocabulary::Default(), chunker);
  ASSERT_FALSE(corpus.empty());
  const auto r = Chair(corpus, ObjectVocabulary::Default());
  EXPECT_GT(r.chair_s, 0);
  EXPECT_LT(r.chair_s, 1);
}

TEST(WinRateTest, TiesLoseAndKindsAreWeighted) {
  const std::vector<PairOutcome> pairs = {
      {CorruptionKind::kAddObject, 0, -1},
      {CorruptionKind::kAddObject, -0.5, -0.5},
      {CorruptionKind::kAlterAttribute, 0, -0.25},
      {CorruptionKind::kFlipRelation, -0.1, 0},
      {CorruptionKind::kFlipRelation, 0, -1},
      {CorruptionKind::kFlipRelation, 0, -0.2},
  };
  const auto r = WinRate(pairs);
  EXPECT_EQ(r.overall.wins, 4);
  EXPECT_EQ(r.overall.n, 6);
  EXPECT_DOUBLE_EQ(r.overall.rate, 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(r.per_kind.at(CorruptionKind::kAddObject).rate, 0.5);
  EXPECT_DOUBLE_EQ(r.per_kind.at(CorruptionKind::kAlterAttribute).rate, 1.0);
  EXPECT_DOUBLE_EQ(r.per_kind.at(CorruptionKind::kFlipRelation).rate, 2.0 / 3.0);
  EXPECT_FALSE((PairOutcome{CorruptionKind::kAddObject, -0.3, -0.3}.Win()));
}

TEST(WinRateTest, OverallIsCountWeightedMeanOfKinds) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-2, 0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<PairOutcome> pairs(1 + rng() % 50);
    for (auto& p : pairs) {
      p.kind = static_cast<CorruptionKind>(rng() % 3);
      p.faithful_penalty = rng() % 4 ? u(rng) : 0;
      p.hallucinated_penalty = rng() % 5 ? u(rng) : p.faithful_penalty;
    }
    const auto r = WinRate(pairs);
    long wins = 0, n = 0;
    double weighted = 0;
    for (const auto& [kind, rc] : r.per_kind) {
      wins += rc.wins;
      n += rc.n;
      weighted += rc.rate * rc.n;
    }
    EXPECT_EQ(wins, r.overall.wins);
    EXPECT_EQ(n, r.overall.n);
    EXPECT_NEAR(weighted / n, r.overall.rate, 1e-12);
  }
}

TEST(FamilyWinRateTest, ExactOracleWinsEverything) {
  const auto cases = EnumerateFamilyCases(EnumerateSceneFamily(3, 3));
  PipelineRun run;
  run.threads = 1;
  const auto r = FamilyWinRate(cases, run);
  EXPECT_GT(r.overall.n, 0);
  EXPECT_EQ(r.overall.rate, 1.0);
  EXPECT_EQ(r.per_kind.size(), 3u);
  for (const auto& [kind, rc] : r.per_kind) EXPECT_EQ(rc.rate, 1.0);
}

TEST(StabilityTest, FlatAtZeroNoise) {
  StabilityOptions options;
  options.oracle.sigma = 0;
  options.trials = 60;
  options.threads = 1;
  const auto curve = RunStability(EnumerateSceneFamily(3, 2), options);
  ASSERT_EQ(curve.points.size(), 3u);
  for (const auto& p : curve.points) EXPECT_EQ(p.win.rate, 1.0);
  EXPECT_EQ(curve.PairedSe(0, 2), 0);
}

TEST(StabilityTest, DeterministicAndPaired) {
  StabilityOptions options;
  options.trials = 150;
  options.threads = 1;
  options.ks = {1, 4};
  const auto scenes = EnumerateSceneFamily(4, 4);
  const auto a = RunStability(scenes, options);
  options.threads = 3;
  const auto b = RunStability(scenes, options);
  EXPECT_EQ(a.wins, b.wins);
  ASSERT_EQ(a.wins.size(), 2u);
  EXPECT_EQ(a.wins[0].size(), 150u);
  // Paired standard error from the discordant trials.
  double d_sum = 0, d_sq = 0;
  for (int t = 0; t < 150; ++t) {
    const double d = double(a.wins[1][t]) - double(a.wins[0][t]);
    d_sum += d;
    d_sq += d * d;
  }
  const double mean = d_sum / 150;
  const double var = (d_sq / 150 - mean * mean) * 150 / 149;
  EXPECT_NEAR(a.PairedSe(0, 1), std::sqrt(var / 150), 1e-12);
  for (const auto& p : a.points) {
    EXPECT_NEAR(p.se, std::sqrt(p.win.rate * (1 - p.win.rate) / 150), 1e-12);
  }
}

TEST(MetricsReportTest, JsonMatchesSchema) {
  MetricsReport report;
  report.chair = Chair({{{"dog", "cat"}, {"dog"}}}, Animals());
  report.win_rate = WinRate({{CorruptionKind::kAddObject, 0, -1},
                             {CorruptionKind::kFlipRelation, 0, 0}});
  StabilityOptions options;
  options.trials = 30;
  options.threads = 1;
  report.stability = RunStability(EnumerateSceneFamily(3, 2), options);
  report.context["sigma"] = "0.15";
  const std::string json = report.ToJson();
  const auto errors = ValidateDocument("metrics_report", json);
  EXPECT_TRUE(errors.empty()) << errors.front();
  const auto doc = nlohmann::json::parse(json);
  EXPECT_EQ(doc["chair_i"], 0.5);
  EXPECT_EQ(doc["win_rate"]["per_kind"]["obj"]["rate"], 1.0);
  EXPECT_EQ(doc["win_rate"]["per_kind"]["rel"]["rate"], 0.0);
  EXPECT_EQ(doc["win_rate_by_k"].size(), 3u);
  const std::string table = report.StabilityTable();
  EXPECT_EQ(table.rfind("k\trate\n", 0), 0u) << table;
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 4);
}

}  // namespace
}  // namespace halloc
