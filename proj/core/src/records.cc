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

#include <map>
#include <set>

#include "json.hpp"

namespace halloc {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void Bad(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

void CheckKeys(const json& doc, const std::set<std::string>& required,
               const std::set<std::string>& optional, const std::string& what) {
  if (!doc.is_object()) Bad(what + " must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (!required.contains(key) && !optional.contains(key)) {
      Bad(what + ": unknown field '" + key + "'");
    }
  }
  for (const auto& key : required) {
    if (!doc.contains(key)) Bad(what + ": missing field '" + key + "'");
  }
}

std::string String(const json& doc, const char* key, const std::string& what) {
  const auto& v = doc.at(key);
  if (!v.is_string()) Bad(what + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> Numbers(const json& doc, const char* key, const std::string& what) {
  const auto& v = doc.at(key);
  if (!v.is_array()) Bad(what + ": '" + key + "' must be an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) Bad(what + ": '" + key + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

json Parse(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    Bad(what + " is not valid JSON: " + e.what());
  }
}

}  // namespace

ScoreRequest ParseScoreRequest(std::string_view text) {
  const std::string what = "score request";
  const json doc = Parse(text, what);
  CheckKeys(doc, {"id", "image", "caption"}, {"logp_policy", "logp_ref"}, what);
  ScoreRequest req;
  req.id = String(doc, "id", what);
  req.caption = String(doc, "caption", what);
  const json& image = doc.at("image");
  if (!image.is_object() || image.size() != 1) {
    Bad(what + ": 'image' must hold exactly one of path, b64_png, scene_id");
  }
  const auto& [key, value] = *image.items().begin();
  if (key == "path") {
    req.image.kind = ImageSpec::Kind::kPath;
  } else if (key == "b64_png") {
    req.image.kind = ImageSpec::Kind::kB64Png;
  } else if (key == "scene_id") {
    req.image.kind = ImageSpec::Kind::kSceneId;
  } else {
    Bad(what + ": unknown image field '" + key + "'");
  }
  if (!value.is_string()) Bad(what + ": image reference must be a string");
  req.image.value = value.get<std::string>();
  if (doc.contains("logp_policy")) req.logp_policy = Numbers(doc, "logp_policy", what);
  if (doc.contains("logp_ref")) req.logp_ref = Numbers(doc, "logp_ref", what);
  return req;
}

std::string EncodeScoreRequest(const ScoreRequest& req) {
  ordered_json doc;
  doc["id"] = req.id;
  const char* key = req.image.kind == ImageSpec::Kind::kPath     ? "path"
                    : req.image.kind == ImageSpec::Kind::kB64Png ? "b64_png"
                                                                 : "scene_id";
  doc["image"] = ordered_json{{key, req.image.value}};
  doc["caption"] = req.caption;
  if (req.logp_policy) doc["logp_policy"] = *req.logp_policy;
  if (req.logp_ref) doc["logp_ref"] = *req.logp_ref;
  return doc.dump();
}

ScoreRecordLine MakeScoreRecord(std::string id, const DetectionReport& report,
                                const RewardVector& rewards, double timing_ms) {
  ScoreRecordLine line;
  line.id = std::move(id);
  line.r_rec = report.r_rec;
  line.r = rewards.r;
  line.timing_ms = timing_ms;
  for (const Token& tok : report.tokens.tokens) {
    line.tokens.push_back({tok.index, tok.text, std::nullopt, std::nullopt});
  }
  for (const auto& rec : report.penalties) {
    TokenRecord& entry = line.tokens.at(rec.token);
    const std::string kind(PenaltyKindName(rec.kind));
    entry.kind = entry.kind ? *entry.kind + "+" + kind : kind;
    entry.penalty = entry.penalty.value_or(0.0) + rec.value;
  }
  return line;
}

std::string EncodeScoreRecord(const ScoreRecordLine& line) {
  ordered_json doc;
  doc["schema_version"] = kRecordSchemaVersion;
  doc["id"] = line.id;
  ordered_json tokens = ordered_json::array();
  for (const auto& t : line.tokens) {
    ordered_json entry{{"t", t.t}, {"token", t.token}};
    if (t.kind) entry["kind"] = *t.kind;
    if (t.penalty) entry["penalty"] = *t.penalty;
    tokens.push_back(std::move(entry));
  }
  doc["tokens"] = std::move(tokens);
  doc["r_rec"] = line.r_rec;
  doc["r"] = line.r;
  doc["timing_ms"] = line.timing_ms;
  return doc.dump();
}

ScoreRecordLine DecodeScoreRecord(std::string_view text) {
  const std::string what = "score record";
  const json doc = Parse(text, what);
  CheckKeys(doc, {"schema_version", "id", "tokens", "r_rec", "r", "timing_ms"}, {},
            what);
  if (doc.at("schema_version") != kRecordSchemaVersion) {
    Bad(what + ": unsupported schema_version");
  }
  ScoreRecordLine line;
  line.id = String(doc, "id", what);
  if (!doc.at("tokens").is_array()) Bad(what + ": 'tokens' must be an array");
  for (const auto& t : doc.at("tokens")) {
    CheckKeys(t, {"t", "token"}, {"kind", "penalty"}, what + " token");
    if (!t.at("t").is_number_integer()) Bad(what + ": 't' must be an integer");
    TokenRecord rec{t.at("t").get<int>(), String(t, "token", what), std::nullopt,
                    std::nullopt};
    if (t.contains("kind")) rec.kind = String(t, "kind", what);
    if (t.contains("penalty")) {
      if (!t.at("penalty").is_number()) Bad(what + ": 'penalty' must be a number");
      rec.penalty = t.at("penalty").get<double>();
    }
    line.tokens.push_back(std::move(rec));
  }
  if (!doc.at("r_rec").is_number() || !doc.at("timing_ms").is_number()) {
    Bad(what + ": 'r_rec' and 'timing_ms' must be numbers");
  }
  line.r_rec = doc.at("r_rec").get<double>();
  line.r = Numbers(doc, "r", what);
  line.timing_ms = doc.at("timing_ms").get<double>();
  return line;
}

std::string EncodeErrorRecord(const std::string& id, const Error& error) {
  ordered_json doc;
  doc["schema_version"] = kRecordSchemaVersion;
  doc["id"] = id;
  doc["error"] = ordered_json{{"code", std::string(ErrorCodeName(error.code()))},
                              {"message", error.what()}};
  return doc.dump();
}

std::string EncodeDetectionReport(const DetectionReport& report) {
  auto box_json = [](const BBox& b) { return ordered_json{b.x0, b.y0, b.x1, b.y1}; };
  ordered_json doc;
  doc["schema_version"] = kRecordSchemaVersion;
  doc["k"] = report.k;
  ordered_json tokens = ordered_json::array();
  for (const auto& t : report.tokens.tokens) tokens.push_back(t.text);
  doc["tokens"] = std::move(tokens);
  ordered_json alignments = ordered_json::array();
  for (const auto& a : report.alignments) {
    ordered_json rec_boxes = ordered_json::array();
    for (const auto& b : a.rec_boxes) {
      rec_boxes.push_back(b ? box_json(*b) : ordered_json(nullptr));
    }
    alignments.push_back(ordered_json{
        {"phrase", a.phrase.text},
        {"head", a.phrase.head_token},
        {"rec_boxes", std::move(rec_boxes)},
        {"rec_aligned", a.rec_aligned},
        {"org_box", a.org_box ? box_json(*a.org_box) : ordered_json(nullptr)}});
  }
  doc["alignments"] = std::move(alignments);
  ordered_json penalties = ordered_json::array();
  for (const auto& p : report.penalties) {
    ordered_json per = ordered_json::array();
    for (const auto& v : p.per_reconstruction) {
      per.push_back(v ? ordered_json(*v) : ordered_json(nullptr));
    }
    penalties.push_back(ordered_json{{"t", p.token},
                                     {"kind", std::string(PenaltyKindName(p.kind))},
                                     {"value", p.value},
                                     {"per_reconstruction", std::move(per)}});
  }
  doc["penalties"] = std::move(penalties);
  doc["r_rec"] = report.r_rec;
  return doc.dump();
}

}  // namespace halloc
