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

#include <cmath>
#include <memory>
#include <optional>

#include "gtest/gtest.h"
#include "halloc/error.h"
#include "halloc/oracle.h"
#include "halloc/scripted_backend.h"

namespace halloc {
namespace {

constexpr double kTol = 1e-12;

const PenaltyRecord* Find(const DetectionReport& report, const std::string& token,
                          PenaltyKind kind) {
  for (const auto& p : report.penalties) {
    if (report.tokens[p.token].text == token && p.kind == kind) return &p;
  }
  return nullptr;
}

std::vector<double> UnitAtCosine(double c) { return {c, std::sqrt(1 - c * c), 0}; }

// Scripted scene with the four phrases of the street case study. Every
// reconstruction shows all four objects; the original lacks the taxis, has
// the light in a different color and places the dog up and to the right of
// the man instead of straight to the right.
class StreetCaseTest : public ::testing::Test {
 protected:
  static constexpr const char* kCaption =
      "An elderly man is left of a guide dog. There is a red traffic light "
      "and yellow taxis.";

  void SetUp() override {
    backend_ = std::make_shared<ScriptedBackend>();
    original_ = ScriptedBackend::MakeImage("org");
    const BBox man_org{0.1, 0.2, 0.3, 0.4}, dog_org{0.4, 0.6, 0.6, 0.8};
    const BBox man_rec{0.1, 0.4, 0.3, 0.6}, dog_rec{0.5, 0.4, 0.7, 0.6};
    const BBox light{0.7, 0.0, 0.8, 0.2}, taxis{0.0, 0.7, 0.4, 1.0};
    backend_->AddDetection("org", "elderly man", man_org, 0.8);
    backend_->AddDetection("org", "guide dog", dog_org, 0.8);
    backend_->AddDetection("org", "red traffic light", light, 0.7);
    backend_->SetEmbedding("org", light, {1, 0, 0});
    for (int seed = 0; seed < 4; ++seed) {
      const std::string tag = ScriptedBackend::RecTag(seed);
      backend_->AddDetection(tag, "elderly man", man_rec, 0.9);
      backend_->AddDetection(tag, "guide dog", dog_rec, 0.9);
      backend_->AddDetection(tag, "red traffic light", light, 0.9);
      backend_->AddDetection(tag, "yellow taxis", taxis, 0.9);
      backend_->SetEmbedding(tag, light, UnitAtCosine(-0.2));
    }
    backend_->SetDefaultEmbedding({0, 0, 1});
  }

  DetectionReport Run(bool parallel) {
    ModelGateway gateway(BackendConfig{}, backend_);
    DetectOptions options;
    options.parallel = parallel;
    return Detect(kCaption, original_, gateway, chunker_, options);
  }

  std::shared_ptr<ScriptedBackend> backend_;
  ImageRef original_ = ScriptedBackend::MakeImage("unused");
  RuleBasedChunker chunker_;
};

TEST_F(StreetCaseTest, ProducesThePublishedPenalties) {
  const DetectionReport report = Run(/*parallel=*/true);
  ASSERT_EQ(report.penalties.size(), 3u);
  const auto* taxis = Find(report, "taxis", PenaltyKind::kObject);
  const auto* light = Find(report, "light", PenaltyKind::kAttribute);
  const auto* left = Find(report, "left", PenaltyKind::kRelation);
  ASSERT_NE(taxis, nullptr);
  ASSERT_NE(light, nullptr);
  ASSERT_NE(left, nullptr);
  EXPECT_EQ(taxis->value, -1.0);
  EXPECT_NEAR(light->value, -0.6, kTol);
  EXPECT_NEAR(left->value, -0.2, kTol);
  EXPECT_EQ(report.k, 4);
  EXPECT_NEAR(report.r_rec, 1.0, kTol);
  for (const auto& p : report.penalties) {
    EXPECT_EQ(p.per_reconstruction.size(), 4u);
  }
}

TEST_F(StreetCaseTest, OnlyTaxisLackAnOriginalBox) {
  const DetectionReport report = Run(/*parallel=*/false);
  ASSERT_EQ(report.alignments.size(), 4u);
  for (const auto& a : report.alignments) {
    EXPECT_TRUE(a.rec_aligned) << a.phrase.text;
    EXPECT_EQ(a.org_box.has_value(), a.phrase.text != "yellow taxis") << a.phrase.text;
  }
}

TEST_F(StreetCaseTest, SerialAndParallelAgree) {
  const auto a = Run(false), b = Run(true);
  ASSERT_EQ(a.penalties.size(), b.penalties.size());
  for (std::size_t i = 0; i < a.penalties.size(); ++i) {
    EXPECT_EQ(a.penalties[i].token, b.penalties[i].token);
    EXPECT_EQ(a.penalties[i].value, b.penalties[i].value);
  }
  EXPECT_EQ(a.r_rec, b.r_rec);
}

TEST(DetectionTest, MissingObjectAndReversedRelation) {
  // Racket only in the reconstructions; the girl/dog vector in the original
  // points against the reconstructed one at cos = -0.6.
  auto backend = std::make_shared<ScriptedBackend>();
  const ImageRef original = ScriptedBackend::MakeImage("org");
  backend->AddDetection("org", "girl", BBox{0.5, 0.1, 0.7, 0.3}, 0.9);
  backend->AddDetection("org", "dog", BBox{0.2, 0.5, 0.4, 0.7}, 0.9);
  for (int seed = 0; seed < 4; ++seed) {
    const std::string tag = ScriptedBackend::RecTag(seed);
    backend->AddDetection(tag, "girl", BBox{0.1, 0.4, 0.3, 0.6}, 0.9);
    backend->AddDetection(tag, "dog", BBox{0.6, 0.4, 0.8, 0.6}, 0.9);
    backend->AddDetection(tag, "tennis racket", BBox{0.4, 0.7, 0.5, 0.9}, 0.9);
  }
  backend->SetDefaultEmbedding({1, 1});
  ModelGateway gateway(BackendConfig{}, backend);
  const RuleBasedChunker chunker;
  const auto report = Detect("A girl is left of a dog. A tennis racket is on the grass.",
                             original, gateway, chunker);
  ASSERT_EQ(report.penalties.size(), 2u);
  const auto* racket = Find(report, "racket", PenaltyKind::kObject);
  const auto* left = Find(report, "left", PenaltyKind::kRelation);
  ASSERT_NE(racket, nullptr);
  ASSERT_NE(left, nullptr);
  EXPECT_EQ(racket->value, -1.0);
  EXPECT_NEAR(left->value, -0.8, kTol);
}

TEST(DetectionTest, MajorityThreshold) {
  EXPECT_EQ(MajorityThreshold(1), 1);
  EXPECT_EQ(MajorityThreshold(2), 1);
  EXPECT_EQ(MajorityThreshold(3), 2);
  EXPECT_EQ(MajorityThreshold(4), 2);
  EXPECT_EQ(MajorityThreshold(5), 3);
}

// A phrase seen in `hits` of 4 reconstructions and never in the original.
DetectionReport DetectPartialPhrase(int hits, int* org_ground_calls) {
  auto backend = std::make_shared<ScriptedBackend>();
  for (int seed = 0; seed < hits; ++seed) {
    backend->AddDetection(ScriptedBackend::RecTag(seed), "cat", BBox{0.2, 0.2, 0.4, 0.4},
                          0.9);
  }
  backend->SetDefaultEmbedding({1, 0});
  ModelGateway gateway(BackendConfig{}, backend);
  const RuleBasedChunker chunker;
  auto report = Detect("A cat.", ScriptedBackend::MakeImage("org"), gateway, chunker);
  *org_ground_calls = backend->ground_calls() - 4;
  return report;
}

TEST(DetectionTest, RecAlignmentNeedsAMajority) {
  int org_calls = 0;
  auto report = DetectPartialPhrase(1, &org_calls);
  EXPECT_FALSE(report.alignments.at(0).rec_aligned);
  EXPECT_TRUE(report.penalties.empty());
  EXPECT_EQ(org_calls, 0);

  report = DetectPartialPhrase(2, &org_calls);
  EXPECT_TRUE(report.alignments.at(0).rec_aligned);
  ASSERT_EQ(report.penalties.size(), 1u);
  EXPECT_EQ(report.penalties[0].value, -1.0);
  EXPECT_EQ(org_calls, 1);

  report = DetectPartialPhrase(0, &org_calls);
  EXPECT_FALSE(report.alignments.at(0).rec_aligned);
  EXPECT_EQ(org_calls, 0);
}

TEST(DetectionTest, HighestScoringBoxIsKept) {
  auto backend = std::make_shared<ScriptedBackend>();
  const BBox weak{0.0, 0.0, 0.2, 0.2}, strong{0.5, 0.5, 0.9, 0.9};
  backend->AddDetection("rec/0", "cat", weak, 0.6);
  backend->AddDetection("rec/0", "cat", strong, 0.9);
  ModelGateway gateway(BackendConfig{}, backend);
  const RuleBasedChunker chunker;
  const auto ex = ExtractObjectPhrases(Tokenize("A cat."), chunker);
  const auto alignments = Align(gateway, ex.phrases, ScriptedBackend::MakeImage("org"),
                                {ScriptedBackend::MakeImage("rec/0")});
  ASSERT_EQ(alignments.size(), 1u);
  ASSERT_TRUE(alignments[0].rec_boxes[0].has_value());
  EXPECT_EQ(*alignments[0].rec_boxes[0], strong);
  EXPECT_DOUBLE_EQ(*alignments[0].rec_scores[0], 0.9);
}

TEST(DetectionTest, ClosedForms) {
  EXPECT_EQ(AttributePenalty(1), 0);
  EXPECT_EQ(AttributePenalty(-1), -1);
  EXPECT_NEAR(AttributePenalty(-0.2), -0.6, kTol);
  EXPECT_NEAR(RelationPenalty(0.6), -0.2, kTol);
  EXPECT_NEAR(RelationPenalty(-0.6), -0.8, kTol);
  EXPECT_EQ(HolisticReward(1), 1);
  EXPECT_EQ(HolisticReward(-1), 0);
}

TEST(DetectionTest, AggregateMean) {
  const std::vector<std::optional<double>> some = {1.0, std::nullopt, 3.0};
  EXPECT_DOUBLE_EQ(*AggregateMean(some), 2.0);
  const std::vector<std::optional<double>> none = {std::nullopt, std::nullopt};
  EXPECT_FALSE(AggregateMean(none).has_value());
  const std::vector<std::optional<double>> same = {-0.3, -0.3, -0.3, -0.3};
  EXPECT_DOUBLE_EQ(*AggregateMean(same), -0.3);
}

TEST(DetectionTest, RelationCosineInvariances) {
  const BBox a{0.1, 0.1, 0.3, 0.3}, b{0.6, 0.2, 0.8, 0.5};
  const BBox c{0.2, 0.5, 0.3, 0.7}, d{0.4, 0.1, 0.5, 0.3};
  const double base = *RelationCosine(a, b, c, d);
  EXPECT_NEAR(*RelationCosine(b, a, d, c), base, kTol);
  // Translate and scale the reconstructed frame.
  auto move = [](const BBox& x) {
    return BBox{0.05 + x.x0 / 2, 0.1 + x.y0 / 2, 0.05 + x.x1 / 2, 0.1 + x.y1 / 2};
  };
  EXPECT_NEAR(*RelationCosine(a, b, move(c), move(d)), base, kTol);
  EXPECT_FALSE(RelationCosine(a, a, c, d).has_value());
  EXPECT_NEAR(*RelationCosine(a, b, a, b), 1.0, kTol);
}

TEST(DetectionTest, HolisticRewardIsMeanOfMappedCosines) {
  auto backend = std::make_shared<ScriptedBackend>();
  backend->SetEmbedding("org", BBox::Full(), {1, 0, 0});
  const double cosines[] = {0.8, 0.8, 0.6, 0.6};
  std::vector<ImageRef> recs;
  for (int i = 0; i < 4; ++i) {
    backend->SetEmbedding(ScriptedBackend::RecTag(i), BBox::Full(), UnitAtCosine(cosines[i]));
    recs.push_back(ScriptedBackend::MakeImage(ScriptedBackend::RecTag(i)));
  }
  ModelGateway gateway(BackendConfig{}, backend);
  EXPECT_NEAR(ComputeHolisticReward(gateway, ScriptedBackend::MakeImage("org"), recs), 0.85,
              kTol);
}

TEST(DetectionTest, AntipodalImagesGiveZeroReward) {
  auto backend = std::make_shared<ScriptedBackend>();
  backend->SetEmbedding("org", BBox::Full(), {1, 0});
  backend->SetEmbedding("rec/0", BBox::Full(), {-1, 0});
  ModelGateway gateway(BackendConfig{}, backend);
  EXPECT_NEAR(ComputeHolisticReward(gateway, ScriptedBackend::MakeImage("org"),
                                    {ScriptedBackend::MakeImage("rec/0")}),
              0.0, kTol);
}

TEST(DetectionTest, ErrorsNameTheStage) {
  auto backend = std::make_shared<ScriptedBackend>();
  backend->AddDetection("rec/0", "cat", BBox{0.2, 0.2, 0.4, 0.4}, 0.9);
  backend->AddDetection("org", "cat", BBox{0.2, 0.2, 0.4, 0.4}, 0.9);
  ModelGateway gateway(BackendConfig{}, backend);
  const RuleBasedChunker chunker;
  try {
    Detect("A cat.", ScriptedBackend::MakeImage("org"), gateway, chunker);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProtocol);
    EXPECT_NE(std::string(e.what()).find("no scripted embedding"), std::string::npos);
  }
}

TEST(DetectionTest, OracleFaithfulAndCorruptedCaptions) {
  SceneGraph scene;
  scene.objects = {{0, "dog", {"small"}, Point{0.2, 0.5}, 0.2, 0.2},
                   {1, "car", {"red"}, Point{0.7, 0.5}, 0.2, 0.2}};
  auto oracle = std::make_shared<OracleBackend>();
  ModelGateway gateway(BackendConfig{}, oracle);
  const RuleBasedChunker chunker;
  const ImageRef image = OracleBackend::RenderScene(scene);
  const std::string faithful = RenderCaption(scene);
  auto report = Detect(faithful, image, gateway, chunker);
  EXPECT_TRUE(report.penalties.empty()) << faithful;
  EXPECT_NEAR(report.r_rec, 1.0, kTol);

  const std::string corrupted =
      Corrupt(scene, faithful, CorruptionSpec{CorruptionKind::kAddObject, -1, "vase"});
  report = Detect(corrupted, image, gateway, chunker);
  ASSERT_EQ(report.penalties.size(), 1u) << corrupted;
  EXPECT_EQ(report.penalties[0].kind, PenaltyKind::kObject);
  EXPECT_EQ(report.penalties[0].value, -1.0);
  EXPECT_EQ(report.tokens[report.penalties[0].token].text, "vase");
  EXPECT_LT(report.r_rec, 1.0);
}

TEST(DetectionTest, PenaltyKindNamesRoundTrip) {
  for (auto kind : {PenaltyKind::kObject, PenaltyKind::kAttribute, PenaltyKind::kRelation}) {
    EXPECT_EQ(PenaltyKindFromName(PenaltyKindName(kind)), kind);
  }
  EXPECT_THROW(PenaltyKindFromName("size"), Error);
}

}  // namespace
}  // namespace halloc
