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

// Wire protocol shared with the reference model shim. Bodies are compact
// JSON with fields in the documented order; decoding is strict (unknown or
// missing fields are protocol errors), so Encode(Decode(x)) == x for every
// canonical payload.

#ifndef HALLOC_WIRE_H_
#define HALLOC_WIRE_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "halloc/gateway.h"

namespace halloc::wire {

inline constexpr std::string_view kT2IPath = "/v1/t2i";
inline constexpr std::string_view kGroundPath = "/v1/ground";
inline constexpr std::string_view kEmbedPath = "/v1/embed";
inline constexpr std::string_view kScorePath = "/v1/score";
inline constexpr std::string_view kHealthPath = "/v1/healthz";
inline constexpr std::string_view kRequestIdHeader = "X-Request-Id";

struct T2IRequest {
  std::string prompt;
  int n = 0;
  std::vector<std::int64_t> seeds;
  int steps = 4;
};

struct WireImage {
  std::string b64_png;
  int w = 0;
  int h = 0;
};

struct T2IResponse {
  std::vector<WireImage> images;
};

struct GroundRequest {
  std::string image_b64_png;
  std::vector<std::string> phrases;
  double box_threshold = 0.35;
  double text_threshold = 0.25;
};

struct GroundResponse {
  std::vector<Detection> detections;
};

struct EmbedRequest {
  std::string image_b64_png;
  std::vector<BBox> boxes;
};

struct EmbedResponse {
  std::vector<std::vector<double>> embeddings;
  int dim = 0;
};

struct ErrorEnvelope {
  std::string code;
  std::string message;
};

std::string Encode(const T2IRequest& m);
std::string Encode(const T2IResponse& m);
std::string Encode(const GroundRequest& m);
std::string Encode(const GroundResponse& m);
std::string Encode(const EmbedRequest& m);
std::string Encode(const EmbedResponse& m);
std::string Encode(const ErrorEnvelope& m);

// Each throws Error(kProtocol) naming the offending field and quoting an
// excerpt of the payload.
T2IRequest DecodeT2IRequest(std::string_view body);
T2IResponse DecodeT2IResponse(std::string_view body);
GroundRequest DecodeGroundRequest(std::string_view body);
GroundResponse DecodeGroundResponse(std::string_view body);
EmbedRequest DecodeEmbedRequest(std::string_view body);
EmbedResponse DecodeEmbedResponse(std::string_view body);
ErrorEnvelope DecodeErrorEnvelope(std::string_view body);

// First `max` bytes of a payload, for error messages.
std::string Excerpt(std::string_view body, std::size_t max = 120);

}  // namespace halloc::wire

#endif  // HALLOC_WIRE_H_
