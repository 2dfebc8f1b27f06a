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

#include "halloc/oracle.h"

#include <cmath>
#include <memory>

#include "gtest/gtest.h"
#include "halloc/error.h"
#include "halloc/scene.h"

namespace halloc {
namespace {

SceneGraph BallAndBox() {
  SceneGraph scene;
  scene.id = "ball-box";
  scene.objects = {{0, "ball", {"red"}, Point{0.3, 0.5}, 0.2, 0.2},
                   {1, "box", {"blue"}, Point{0.7, 0.5}, 0.2, 0.2}};
  return scene;
}

const PenaltyRecord* OnlyPenalty(const DetectionReport& report) {
  return report.penalties.size() == 1 ? &report.penalties[0] : nullptr;
}

TEST(SceneTest, JsonRoundTripAndValidation) {
  const SceneGraph scene = BallAndBox();
  EXPECT_EQ(SceneFromJson(SceneToJson(scene)), scene);
  SceneGraph bad = scene;
  bad.objects[1].id = 0;
  EXPECT_THROW(bad.Validate(), Error);
  bad = scene;
  bad.objects[0].center = Point{0.95, 0.5};
  EXPECT_THROW(bad.Validate(), Error);
}

TEST(SceneTest, RelationGeometry) {
  const SceneGraph scene = BallAndBox();
  EXPECT_EQ(RelationBetween(scene.objects[0], scene.objects[1]), "left");
  EXPECT_EQ(RelationBetween(scene.objects[1], scene.objects[0]), "right");
  EXPECT_EQ(*OppositeTerm("left"), "right");
  EXPECT_EQ(*OppositeTerm("above"), "below");
  EXPECT_FALSE(RelationDirection("inside").has_value());
  const Point left = *RelationDirection("left");
  EXPECT_EQ(left.x, 1);
  EXPECT_EQ(left.y, 0);
}

TEST(RenderCaptionTest, TemplateAndDeterminism) {
  const SceneGraph scene = BallAndBox();
  EXPECT_EQ(RenderCaption(scene), "A red ball is to the left of a blue box.");
  EXPECT_EQ(RenderCaption(scene, 5), RenderCaption(scene, 5));
  SceneGraph single;
  single.objects = {{0, "cup", {}, Point{0.5, 0.5}, 0.2, 0.2}};
  const std::string caption = RenderCaption(single);
  const auto tokens = Tokenize(caption);
  for (const auto& t : tokens.tokens) EXPECT_NE(t.kind, TokenKind::kPositional) << caption;
}

TEST(CorruptTest, AddObject) {
  const SceneGraph scene = BallAndBox();
  const std::string faithful = RenderCaption(scene);
  const std::string corrupted =
      Corrupt(scene, faithful, CorruptionSpec{CorruptionKind::kAddObject, -1, "clock"});
  EXPECT_NE(corrupted.find("clock"), std::string::npos) << corrupted;
  EXPECT_NE(corrupted.find("red ball"), std::string::npos) << corrupted;
  const auto report = OracleDetect(scene, corrupted);
  const auto* p = OnlyPenalty(report);
  ASSERT_NE(p, nullptr) << corrupted;
  EXPECT_EQ(p->kind, PenaltyKind::kObject);
  EXPECT_EQ(p->value, -1.0);
  EXPECT_THROW(Corrupt(scene, faithful, CorruptionSpec{CorruptionKind::kAddObject, -1, "ball"}),
               Error);
}

TEST(CorruptTest, AlterAttribute) {
  const SceneGraph scene = BallAndBox();
  const std::string corrupted = Corrupt(scene, RenderCaption(scene),
                                        CorruptionSpec{CorruptionKind::kAlterAttribute, 0, "green"});
  EXPECT_EQ(corrupted, "A green ball is to the left of a blue box.");
  const auto report = OracleDetect(scene, corrupted);
  const auto* p = OnlyPenalty(report);
  ASSERT_NE(p, nullptr);
  EXPECT_EQ(p->kind, PenaltyKind::kAttribute);
  // Feature counts {ball, red} against {ball, green}: cosine 1/2.
  EXPECT_NEAR(p->value, -0.25, 1e-12);
}

TEST(CorruptTest, FlipRelation) {
  const SceneGraph scene = BallAndBox();
  const std::string corrupted = Corrupt(scene, RenderCaption(scene),
                                        CorruptionSpec{CorruptionKind::kFlipRelation, 0, ""});
  EXPECT_EQ(corrupted, "A red ball is to the right of a blue box.");
  const auto report = OracleDetect(scene, corrupted);
  const auto* p = OnlyPenalty(report);
  ASSERT_NE(p, nullptr);
  EXPECT_EQ(p->kind, PenaltyKind::kRelation);
  EXPECT_EQ(report.tokens[p->token].text, "right");
  EXPECT_NEAR(p->value, -1.0, 1e-12);
}

TEST(CorruptTest, InapplicableSpecs) {
  SceneGraph single;
  single.objects = {{0, "cup", {"small"}, Point{0.5, 0.5}, 0.2, 0.2}};
  try {
    Corrupt(single, RenderCaption(single), CorruptionSpec{CorruptionKind::kFlipRelation});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInapplicable);
  }
  EXPECT_THROW(Corrupt(single, RenderCaption(single),
                       CorruptionSpec{CorruptionKind::kAlterAttribute, 9, "red"}),
               Error);
}

TEST(CorruptTest, KindNames) {
  for (auto kind : {CorruptionKind::kAddObject, CorruptionKind::kAlterAttribute,
                    CorruptionKind::kFlipRelation}) {
    EXPECT_EQ(CorruptionKindFromName(CorruptionKindName(kind)), kind);
  }
  EXPECT_EQ(CorruptionKindFromName("obj"), CorruptionKind::kAddObject);
  EXPECT_THROW(CorruptionKindFromName("swap"), Error);
}

TEST(OracleDetectTest, FaithfulCaptionIsClean) {
  const auto report = OracleDetect(BallAndBox(), "A red ball is to the left of a blue box.");
  EXPECT_TRUE(report.penalties.empty());
  EXPECT_NEAR(report.r_rec, 1.0, 1e-12);
}

TEST(OracleDetectTest, RejectsCaptionsOutsideTheGrammar) {
  auto code = [](const std::string& caption) {
    try {
      OracleDetect(BallAndBox(), caption);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kNotFound;
  };
  EXPECT_EQ(code("A red ball. A red ball."), ErrorCode::kUnparseable);
  EXPECT_EQ(code("A ball is to the left of a box. A box is to the left of a ball."),
            ErrorCode::kUnparseable);
}

TEST(TotalPenaltyTest, SumsRecords) {
  DetectionReport report;
  EXPECT_EQ(TotalPenalty(report), 0);
  report.penalties = {{0, PenaltyKind::kObject, -1, {}}};
  EXPECT_EQ(TotalPenalty(report), -1);
  report.penalties.push_back({1, PenaltyKind::kAttribute, -0.6, {}});
  report.penalties.push_back({2, PenaltyKind::kRelation, -0.2, {}});
  report.r_rec = 0.9;
  EXPECT_NEAR(TotalPenalty(report), -1.8, 1e-12);
}

TEST(SceneFamilyTest, SizeAndComposition) {
  const auto scenes = EnumerateSceneFamily();
  EXPECT_EQ(scenes.size(), 1224u);
  for (const auto& s : scenes) {
    EXPECT_NO_THROW(s.Validate());
    EXPECT_LE(s.objects.size(), 5u);
    for (const auto& o : s.objects) {
      EXPECT_LE(o.attributes.size(), 2u);
      EXPECT_NE(o.label, "clock");
    }
  }
  const auto cases = EnumerateFamilyCases(scenes);
  int faithful = 0;
  for (const auto& c : cases) faithful += !c.corruption.has_value();
  EXPECT_EQ(faithful, 1224);
  EXPECT_EQ(cases.size(), 12248u);
}

TEST(SceneFamilyTest, EveryCorruptionLowersTotalPenalty) {
  const auto cases = EnumerateFamilyCases(EnumerateSceneFamily());
  double faithful_total = 0;
  for (const auto& c : cases) {
    const double total = TotalPenalty(OracleDetect(c.scene, c.caption));
    if (!c.corruption) {
      faithful_total = total;
      EXPECT_EQ(total, 0) << c.caption;
    } else {
      ASSERT_LT(total, faithful_total) << c.caption;
    }
  }
}

// Pipeline with oracle backends against the reference scorer on a slice of
// the family; the full sweep runs in the acceptance binary.
TEST(OracleEquivalenceTest, PipelineMatchesReference) {
  const auto scenes = EnumerateSceneFamily(3, 4);
  const auto cases = EnumerateFamilyCases(scenes);
  auto oracle = std::make_shared<OracleBackend>();
  ModelGateway gateway(BackendConfig{}, oracle);
  const RuleBasedChunker chunker;
  for (const auto& c : cases) {
    const ImageRef image = OracleBackend::RenderScene(c.scene);
    DetectOptions options;
    options.parallel = false;
    const auto got = Detect(c.caption, image, gateway, chunker, options);
    const auto want = OracleDetect(c.scene, c.caption);
    ASSERT_EQ(got.penalties.size(), want.penalties.size()) << c.caption;
    for (std::size_t i = 0; i < got.penalties.size(); ++i) {
      EXPECT_EQ(got.penalties[i].token, want.penalties[i].token) << c.caption;
      EXPECT_EQ(got.penalties[i].kind, want.penalties[i].kind) << c.caption;
      EXPECT_NEAR(got.penalties[i].value, want.penalties[i].value, 1e-9) << c.caption;
    }
    EXPECT_NEAR(got.r_rec, want.r_rec, 1e-9) << c.caption;
  }
}

TEST(OracleBackendTest, NoiseIsSeededAndOmitsObjects) {
  OracleOptions options;
  options.sigma = 0.5;
  auto oracle = std::make_shared<OracleBackend>(options);
  const std::vector<std::int64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7};
  const std::string caption = "A red ball is to the left of a blue box.";
  const auto a = oracle->Generate(caption, seeds, 4);
  const auto b = oracle->Generate(caption, seeds, 4);
  std::size_t fewer = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].PngBytes(), b[i].PngBytes());
    fewer += oracle->SceneOf(a[i]).objects.size() < 2;
  }
  EXPECT_GT(fewer, 0u);

  auto exact = std::make_shared<OracleBackend>();
  for (const auto& image : exact->Generate(caption, seeds, 4)) {
    const auto scene = exact->SceneOf(image);
    ASSERT_EQ(scene.objects.size(), 2u);
    EXPECT_LT(scene.objects[0].center.x, scene.objects[1].center.x);
  }
}

TEST(OracleBackendTest, GroundsByHeadLabelAndEmbedsUnitVectors) {
  auto oracle = std::make_shared<OracleBackend>();
  const ImageRef image = OracleBackend::RenderScene(BallAndBox());
  const auto dets = oracle->Ground(image, {"red ball", "green clock"}, GroundingThresholds{});
  ASSERT_EQ(dets.size(), 1u);
  EXPECT_EQ(dets[0].phrase, "red ball");
  EXPECT_EQ(dets[0].box, BallAndBox().objects[0].Box());
  const std::vector<BBox> boxes = {BBox::Full(), dets[0].box};
  for (const auto& e : oracle->Embed(image, boxes)) {
    double n = 0;
    for (double x : e.values) n += x * x;
    EXPECT_NEAR(n, 1.0, 1e-12);
  }
}

}  // namespace
}  // namespace halloc
