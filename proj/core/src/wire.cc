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

#include "halloc/wire.h"

#include <set>

#include "halloc/error.h"
#include "json.hpp"

namespace halloc::wire {
namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void Fail(std::string_view body, const std::string& why) {
  throw Error(ErrorCode::kProtocol, why + " in payload: " + Excerpt(body));
}

Json Parse(std::string_view body) {
  try {
    Json j = Json::parse(body);
    if (!j.is_object()) Fail(body, "top-level value is not an object");
    return j;
  } catch (const Json::parse_error& e) {
    Fail(body, std::string("malformed JSON (") + e.what() + ")");
  }
}

// Asserts the object has exactly `keys`.
void ExpectKeys(std::string_view body, const Json& j,
                std::initializer_list<std::string_view> keys) {
  std::set<std::string, std::less<>> want(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!want.contains(it.key())) Fail(body, "unknown field '" + it.key() + "'");
  }
  for (auto k : keys) {
    if (!j.contains(k)) Fail(body, "missing field '" + std::string(k) + "'");
  }
}

std::string GetString(std::string_view body, const Json& j, const char* key) {
  if (!j.at(key).is_string()) Fail(body, std::string("'") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

std::int64_t GetInt(std::string_view body, const Json& j, const char* key) {
  if (!j.at(key).is_number_integer()) {
    Fail(body, std::string("'") + key + "' must be an integer");
  }
  return j.at(key).get<std::int64_t>();
}

double GetNumber(std::string_view body, const Json& v, const char* what) {
  if (!v.is_number()) Fail(body, std::string("'") + what + "' must be a number");
  return v.get<double>();
}

const Json& GetArray(std::string_view body, const Json& j, const char* key) {
  if (!j.at(key).is_array()) Fail(body, std::string("'") + key + "' must be an array");
  return j.at(key);
}

Json BoxJson(const BBox& b) { return Json::array({b.x0, b.y0, b.x1, b.y1}); }

BBox BoxFrom(std::string_view body, const Json& v) {
  if (!v.is_array() || v.size() != 4) Fail(body, "box must be [x0,y0,x1,y1]");
  try {
    return BBox::Make(GetNumber(body, v[0], "box"), GetNumber(body, v[1], "box"),
                      GetNumber(body, v[2], "box"), GetNumber(body, v[3], "box"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kProtocol) throw;
    Fail(body, e.what());
  }
}

}  // namespace

std::string Excerpt(std::string_view body, std::size_t max) {
  if (body.size() <= max) return std::string(body);
  return std::string(body.substr(0, max)) + "...";
}

std::string Encode(const T2IRequest& m) {
  Json j;
  j["prompt"] = m.prompt;
  j["n"] = m.n;
  j["seeds"] = m.seeds;
  j["steps"] = m.steps;
  return j.dump();
}

std::string Encode(const T2IResponse& m) {
  Json images = Json::array();
  for (const auto& im : m.images) {
    Json e;
    e["b64_png"] = im.b64_png;
    e["w"] = im.w;
    e["h"] = im.h;
    images.push_back(std::move(e));
  }
  Json j;
  j["images"] = std::move(images);
  return j.dump();
}

std::string Encode(const GroundRequest& m) {
  Json j;
  j["image_b64_png"] = m.image_b64_png;
  j["phrases"] = m.phrases;
  j["box_threshold"] = m.box_threshold;
  j["text_threshold"] = m.text_threshold;
  return j.dump();
}

std::string Encode(const GroundResponse& m) {
  Json dets = Json::array();
  for (const auto& d : m.detections) {
    Json e;
    e["phrase"] = d.phrase;
    e["box"] = BoxJson(d.box);
    e["score"] = d.score;
    dets.push_back(std::move(e));
  }
  Json j;
  j["detections"] = std::move(dets);
  return j.dump();
}

std::string Encode(const EmbedRequest& m) {
  Json boxes = Json::array();
  for (const auto& b : m.boxes) boxes.push_back(BoxJson(b));
  Json j;
  j["image_b64_png"] = m.image_b64_png;
  j["boxes"] = std::move(boxes);
  return j.dump();
}

std::string Encode(const EmbedResponse& m) {
  Json j;
  j["embeddings"] = m.embeddings;
  j["dim"] = m.dim;
  return j.dump();
}

std::string Encode(const ErrorEnvelope& m) {
  Json inner;
  inner["code"] = m.code;
  inner["message"] = m.message;
  Json j;
  j["error"] = std::move(inner);
  return j.dump();
}

T2IRequest DecodeT2IRequest(std::string_view body) {
  Json j = Parse(body);
  ExpectKeys(body, j, {"prompt", "n", "seeds", "steps"});
  T2IRequest m;
  m.prompt = GetString(body, j, "prompt");
  m.n = static_cast<int>(GetInt(body, j, "n"));
  for (const auto& s : GetArray(body, j, "seeds")) {
    if (!s.is_number_integer()) Fail(body, "'seeds' must hold integers");
    m.seeds.push_back(s.get<std::int64_t>());
  }
  m.steps = static_cast<int>(GetInt(body, j, "steps"));
  if (m.n < 1 || static_cast<std::size_t>(m.n) != m.seeds.size()) {
    Fail(body, "'n' must equal the number of seeds and be >= 1");
  }
  if (m.steps < 1) Fail(body, "'steps' must be >= 1");
  return m;
}

T2IResponse DecodeT2IResponse(std::string_view body) {
  Json j = Parse(body);
  ExpectKeys(body, j, {"images"});
  T2IResponse m;
  for (const auto& e : GetArray(body, j, "images")) {
    if (!e.is_object()) Fail(body, "image entry must be an object");
    ExpectKeys(body, e, {"b64_png", "w", "h"});
    WireImage im;
    im.b64_png = GetString(body, e, "b64_png");
    im.w = static_cast<int>(GetInt(body, e, "w"));
    im.h = static_cast<int>(GetInt(body, e, "h"));
    if (im.w <= 0 || im.h <= 0) Fail(body, "image dimensions must be > 0");
    m.images.push_back(std::move(im));
  }
  return m;
}

GroundRequest DecodeGroundRequest(std::string_view body) {
  Json j = Parse(body);
  ExpectKeys(body, j,
             {"image_b64_png", "phrases", "box_threshold", "text_threshold"});
  GroundRequest m;
  m.image_b64_png = GetString(body, j, "image_b64_png");
  for (const auto& p : GetArray(body, j, "phrases")) {
    if (!p.is_string() || p.get<std::string>().empty()) {
      Fail(body, "'phrases' must hold non-empty strings");
    }
    m.phrases.push_back(p.get<std::string>());
  }
  m.box_threshold = GetNumber(body, j.at("box_threshold"), "box_threshold");
  m.text_threshold = GetNumber(body, j.at("text_threshold"), "text_threshold");
  return m;
}

GroundResponse DecodeGroundResponse(std::string_view body) {
  Json j = Parse(body);
  ExpectKeys(body, j, {"detections"});
  GroundResponse m;
  for (const auto& e : GetArray(body, j, "detections")) {
    if (!e.is_object()) Fail(body, "detection must be an object");
    ExpectKeys(body, e, {"phrase", "box", "score"});
    Detection d;
    d.phrase = GetString(body, e, "phrase");
    d.box = BoxFrom(body, e.at("box"));
    d.score = GetNumber(body, e.at("score"), "score");
    if (!(d.score >= 0 && d.score <= 1)) Fail(body, "'score' outside [0,1]");
    m.detections.push_back(std::move(d));
  }
  return m;
}

EmbedRequest DecodeEmbedRequest(std::string_view body) {
  Json j = Parse(body);
  ExpectKeys(body, j, {"image_b64_png", "boxes"});
  EmbedRequest m;
  m.image_b64_png = GetString(body, j, "image_b64_png");
  for (const auto& b : GetArray(body, j, "boxes")) {
    m.boxes.push_back(BoxFrom(body, b));
  }
  return m;
}

EmbedResponse DecodeEmbedResponse(std::string_view body) {
  Json j = Parse(body);
  ExpectKeys(body, j, {"embeddings", "dim"});
  EmbedResponse m;
  m.dim = static_cast<int>(GetInt(body, j, "dim"));
  for (const auto& e : GetArray(body, j, "embeddings")) {
    if (!e.is_array()) Fail(body, "embedding must be an array");
    std::vector<double> v;
    v.reserve(e.size());
    for (const auto& x : e) v.push_back(GetNumber(body, x, "embeddings"));
    if (static_cast<int>(v.size()) != m.dim) {
      Fail(body, "embedding length differs from 'dim'");
    }
    m.embeddings.push_back(std::move(v));
  }
  return m;
}

ErrorEnvelope DecodeErrorEnvelope(std::string_view body) {
  Json j = Parse(body);
  ExpectKeys(body, j, {"error"});
  const Json& inner = j.at("error");
  if (!inner.is_object()) Fail(body, "'error' must be an object");
  ExpectKeys(body, inner, {"code", "message"});
  return {GetString(body, inner, "code"), GetString(body, inner, "message")};
}

}  // namespace halloc::wire
