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

#include "halloc/records.h"

#include <random>

#include "gtest/gtest.h"
#include "halloc/oracle.h"
#include "halloc/schema.h"
#include "json.hpp"

namespace halloc {
namespace {

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kNotFound;
}

TEST(ScoreRequestTest, ParsesEveryImageKind) {
  auto req = ParseScoreRequest(R"({"id":"a","image":{"path":"/x.png"},"caption":"A cat."})");
  EXPECT_EQ(req.image.kind, ImageSpec::Kind::kPath);
  EXPECT_EQ(req.image.value, "/x.png");
  EXPECT_FALSE(req.logp_policy.has_value());
  req = ParseScoreRequest(R"({"id":"b","image":{"b64_png":"AAAA"},"caption":"x"})");
  EXPECT_EQ(req.image.kind, ImageSpec::Kind::kB64Png);
  req = ParseScoreRequest(
      R"({"id":"c","image":{"scene_id":"s"},"caption":"x","logp_policy":[-1],"logp_ref":[-2]})");
  EXPECT_EQ(req.image.kind, ImageSpec::Kind::kSceneId);
  EXPECT_EQ(*req.logp_ref, std::vector<double>{-2});
}

TEST(ScoreRequestTest, IsStrict) {
  const char* bad[] = {
      R"({"id":"a","image":{"path":"p"},"caption":"x","extra":1})",
      R"({"id":"a","image":{"path":"p","scene_id":"s"},"caption":"x"})",
      R"({"id":"a","image":{},"caption":"x"})",
      R"({"id":"a","image":{"url":"p"},"caption":"x"})",
      R"({"id":"a","image":{"path":"p"}})",
      R"({"id":7,"image":{"path":"p"},"caption":"x"})",
      R"({"id":"a","image":{"path":"p"},"caption":"x","logp_ref":["a"]})",
      R"([1,2])",
      "{",
  };
  for (const char* text : bad) {
    EXPECT_EQ(CodeOf([&] { ParseScoreRequest(text); }), ErrorCode::kInvalidArgument) << text;
  }
}

DetectionReport SampleReport() {
  DetectionReport report;
  report.tokens = Tokenize("A red ball is left of a box.");
  report.k = 4;
  report.r_rec = 0.5;
  report.penalties = {{2, PenaltyKind::kAttribute, -0.25, {-0.25, -0.25, std::nullopt, -0.25}},
                      {2, PenaltyKind::kRelation, -0.5, {}},
                      {7, PenaltyKind::kObject, -1, {}}};
  return report;
}

TEST(ScoreRecordTest, MergesPenaltiesPerToken) {
  const auto report = SampleReport();
  RewardVector rv;
  rv.r.assign(report.tokens.size(), 0.0);
  const auto line = MakeScoreRecord("x", report, rv, 0);
  ASSERT_EQ(line.tokens.size(), report.tokens.size());
  EXPECT_EQ(*line.tokens[2].kind, "att+rel");
  EXPECT_DOUBLE_EQ(*line.tokens[2].penalty, -0.75);
  EXPECT_EQ(*line.tokens[7].kind, "obj");
  EXPECT_FALSE(line.tokens[0].kind.has_value());
  for (std::size_t t = 0; t < line.tokens.size(); ++t) EXPECT_EQ(line.tokens[t].t, int(t));
}

TEST(ScoreRecordTest, RandomRecordsRoundTripAndMatchSchema) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 0);
  const auto scenes = EnumerateSceneFamily(3, 2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto& scene = scenes[rng() % scenes.size()];
    DetectionReport report = OracleDetect(scene, RenderCaption(scene, rng()));
    const int T = static_cast<int>(report.tokens.size());
    for (int i = rng() % 4; i > 0; --i) {
      report.penalties.push_back(
          {static_cast<int>(rng() % T), static_cast<PenaltyKind>(rng() % 3), u(rng), {}});
    }
    const std::vector<double> lp(T, -1.0);
    const auto rv = AssembleRewards(report, lp, lp);
    const auto line = MakeScoreRecord("id-" + std::to_string(trial), report, rv, 1.5);
    const std::string text = EncodeScoreRecord(line);
    EXPECT_EQ(text.find('\n'), std::string::npos);
    const auto errors = ValidateDocument("score_record", text);
    ASSERT_TRUE(errors.empty()) << errors.front() << "\n" << text;
    EXPECT_EQ(EncodeScoreRecord(DecodeScoreRecord(text)), text);
  }
}

TEST(ScoreRecordTest, DecodeIsStrict) {
  const char* bad[] = {
      R"({"schema_version":2,"id":"a","tokens":[],"r_rec":0,"r":[],"timing_ms":0})",
      R"({"schema_version":1,"id":"a","tokens":[],"r_rec":0,"r":[]})",
      R"({"schema_version":1,"id":"a","tokens":[{"t":0}],"r_rec":0,"r":[],"timing_ms":0})",
      R"({"schema_version":1,"id":"a","tokens":[],"r_rec":"x","r":[],"timing_ms":0})",
  };
  for (const char* text : bad) {
    EXPECT_EQ(CodeOf([&] { DecodeScoreRecord(text); }), ErrorCode::kInvalidArgument) << text;
  }
}

TEST(ErrorRecordTest, MatchesSchema) {
  const std::string text =
      EncodeErrorRecord("line-3", Error(ErrorCode::kNotFound, "image 'a.png' not found"));
  EXPECT_TRUE(ValidateDocument("score_error", text).empty()) << text;
  const auto doc = nlohmann::json::parse(text);
  EXPECT_EQ(doc["error"]["code"], "not_found");
  EXPECT_EQ(doc["id"], "line-3");
}

TEST(DetectionReportTest, EncodesPerReconstructionValues) {
  const auto doc = nlohmann::json::parse(EncodeDetectionReport(SampleReport()));
  EXPECT_EQ(doc["k"], 4);
  EXPECT_EQ(doc["penalties"].size(), 3u);
  EXPECT_TRUE(doc["penalties"][0]["per_reconstruction"][2].is_null());
  EXPECT_EQ(doc["penalties"][0]["per_reconstruction"][3], -0.25);
  EXPECT_EQ(doc["tokens"][2], "ball");
}

}  // namespace
}  // namespace halloc
