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

// Line-delimited record formats: score requests (manifest lines and
// /v1/score bodies), score result lines and detection reports.

#ifndef HALLOC_RECORDS_H_
#define HALLOC_RECORDS_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "halloc/detection.h"
#include "halloc/error.h"
#include "halloc/reward.h"

namespace halloc {

inline constexpr int kRecordSchemaVersion = 1;

struct ImageSpec {
  enum class Kind { kPath, kB64Png, kSceneId };
  Kind kind = Kind::kPath;
  std::string value;
};

// {"id", "image": {"path" | "b64_png" | "scene_id": str}, "caption",
//  "logp_policy"?, "logp_ref"?}
struct ScoreRequest {
  std::string id;
  ImageSpec image;
  std::string caption;
  std::optional<std::vector<double>> logp_policy;
  std::optional<std::vector<double>> logp_ref;
};

// Strict: unknown or mistyped fields are kInvalidArgument.
ScoreRequest ParseScoreRequest(std::string_view text);
std::string EncodeScoreRequest(const ScoreRequest& request);

struct TokenRecord {
  int t = 0;
  std::string token;
  std::optional<std::string> kind;  // "obj", "att" or "rel"
  std::optional<double> penalty;
};

struct ScoreRecordLine {
  std::string id;
  std::vector<TokenRecord> tokens;
  double r_rec = 0;
  std::vector<double> r;
  double timing_ms = 0;
};

// One entry per caption token; penalized tokens carry their kind and
// value. Several records on one token join their kinds with '+' and sum
// their values.
ScoreRecordLine MakeScoreRecord(std::string id, const DetectionReport& report,
                                const RewardVector& rewards, double timing_ms);

// Compact single-line JSON without a trailing newline.
std::string EncodeScoreRecord(const ScoreRecordLine& line);
ScoreRecordLine DecodeScoreRecord(std::string_view text);
// {"schema_version", "id", "error": {"code", "message"}}
std::string EncodeErrorRecord(const std::string& id, const Error& error);

// Full detection report including per-reconstruction values.
std::string EncodeDetectionReport(const DetectionReport& report);

}  // namespace halloc

#endif  // HALLOC_RECORDS_H_
