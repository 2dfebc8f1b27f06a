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

#include "halloc/http_backend.h"

#include "halloc/codec.h"
#include "halloc/error.h"
#include "halloc/wire.h"
#include "httplib.h"

namespace halloc {
namespace {

std::string ImageBase64(const ImageRef& image) {
  return Base64Encode(image.PngBytes());
}

ImageRef ImageFromBase64(const std::string& b64) {
  return ImageRef::FromPng(Base64Decode(b64));
}

void ReplyError(httplib::Response& res, int status, std::string code,
                std::string message) {
  res.status = status;
  res.set_content(wire::Encode(wire::ErrorEnvelope{std::move(code),
                                                   std::move(message)}),
                  "application/json");
}

template <typename Handler>
httplib::Server::Handler Wrap(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    const std::string id =
        req.get_header_value(std::string(wire::kRequestIdHeader));
    if (!id.empty()) res.set_header(std::string(wire::kRequestIdHeader), id);
    try {
      res.set_content(handler(req.body), "application/json");
      res.status = 200;
    } catch (const Error& e) {
      ReplyError(res, HttpStatusFor(e), std::string(ErrorCodeName(e.code())),
                 e.what());
    } catch (const std::exception& e) {
      ReplyError(res, 500, "internal", e.what());
    }
  };
}

}  // namespace

int HttpStatusFor(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kProtocol:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kLengthMismatch:
    case ErrorCode::kOutOfRange:
    case ErrorCode::kDegenerateRegion:
    case ErrorCode::kUnparseable:
    case ErrorCode::kExtractorFailure:
    case ErrorCode::kNotFound:
    case ErrorCode::kEmptyInput:
    case ErrorCode::kInapplicable:
      return 400;
    case ErrorCode::kTransport:
      return 503;
    default:
      return 500;
  }
}

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) {}

std::string HttpBackend::Post(const std::string& base_url,
                              std::string_view path, const std::string& body) {
  if (base_url.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "no endpoint configured for " + std::string(path));
  }
  httplib::Client client(base_url);
  const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  const std::string id = std::to_string(next_id_.fetch_add(1));
  httplib::Headers headers = {{std::string(wire::kRequestIdHeader), id}};
  auto result = client.Post(std::string(path), headers, body, "application/json");
  if (!result) {
    throw Error(ErrorCode::kTransport,
                std::string(path) + " unreachable at " + base_url + ": " +
                    httplib::to_string(result.error()));
  }
  const auto& res = *result;
  if (res.has_header(std::string(wire::kRequestIdHeader)) &&
      res.get_header_value(std::string(wire::kRequestIdHeader)) != id) {
    throw Error(ErrorCode::kProtocol,
                std::string(path) + " answered a different request id");
  }
  if (res.status >= 500) {
    throw Error(ErrorCode::kTransport, std::string(path) + " returned HTTP " +
                                           std::to_string(res.status) + ": " +
                                           wire::Excerpt(res.body));
  }
  if (res.status != 200) {
    std::string detail = wire::Excerpt(res.body);
    try {
      auto env = wire::DecodeErrorEnvelope(res.body);
      detail = env.code + ": " + env.message;
    } catch (const Error&) {
    }
    throw Error(ErrorCode::kProtocol, std::string(path) + " returned HTTP " +
                                          std::to_string(res.status) + " (" +
                                          detail + ")");
  }
  return res.body;
}

std::vector<ImageRef> HttpBackend::Generate(const std::string& prompt,
                                            std::span<const std::int64_t> seeds,
                                            int steps) {
  wire::T2IRequest req{prompt, static_cast<int>(seeds.size()),
                       {seeds.begin(), seeds.end()}, steps};
  auto resp = wire::DecodeT2IResponse(
      Post(config_.t2i_url, wire::kT2IPath, wire::Encode(req)));
  std::vector<ImageRef> out;
  out.reserve(resp.images.size());
  for (const auto& im : resp.images) {
    ImageRef ref = ImageFromBase64(im.b64_png);
    if (ref.width() != im.w || ref.height() != im.h) {
      throw Error(ErrorCode::kProtocol,
                  "t2i image dimensions disagree with the PNG header");
    }
    out.push_back(std::move(ref));
  }
  return out;
}

std::vector<Detection> HttpBackend::Ground(
    const ImageRef& image, const std::vector<std::string>& phrases,
    const GroundingThresholds& thresholds) {
  wire::GroundRequest req{ImageBase64(image), phrases, thresholds.box,
                          thresholds.text};
  return wire::DecodeGroundResponse(
             Post(config_.ground_url, wire::kGroundPath, wire::Encode(req)))
      .detections;
}

std::vector<Embedding> HttpBackend::Embed(const ImageRef& image,
                                          std::span<const BBox> boxes) {
  wire::EmbedRequest req{ImageBase64(image), {boxes.begin(), boxes.end()}};
  auto resp = wire::DecodeEmbedResponse(
      Post(config_.embed_url, wire::kEmbedPath, wire::Encode(req)));
  std::vector<Embedding> out;
  out.reserve(resp.embeddings.size());
  for (auto& v : resp.embeddings) out.push_back(Embedding{std::move(v)});
  return out;
}

bool HttpBackend::Probe() {
  for (const std::string* url :
       {&config_.t2i_url, &config_.ground_url, &config_.embed_url}) {
    if (url->empty()) return false;
    httplib::Client client(*url);
    client.set_connection_timeout(std::chrono::milliseconds(config_.timeout_ms));
    if (!client.Get(std::string(wire::kHealthPath))) return false;
  }
  return true;
}

void MountJsonRoute(httplib::Server& server, const std::string& path,
                    std::function<std::string(const std::string&)> handler) {
  server.Post(path, Wrap(std::move(handler)));
}

void MountModelRoutes(httplib::Server& server,
                      std::shared_ptr<TextToImageBackend> t2i,
                      std::shared_ptr<GroundingBackend> grounding,
                      std::shared_ptr<EmbeddingBackend> embedding) {
  server.Post(std::string(wire::kT2IPath), Wrap([t2i](const std::string& body) {
    auto req = wire::DecodeT2IRequest(body);
    wire::T2IResponse resp;
    for (const auto& im : t2i->Generate(req.prompt, req.seeds, req.steps)) {
      resp.images.push_back({Base64Encode(im.PngBytes()), im.width(),
                             im.height()});
    }
    return wire::Encode(resp);
  }));
  server.Post(std::string(wire::kGroundPath),
              Wrap([grounding](const std::string& body) {
                auto req = wire::DecodeGroundRequest(body);
                wire::GroundResponse resp;
                resp.detections = grounding->Ground(
                    ImageFromBase64(req.image_b64_png), req.phrases,
                    {req.box_threshold, req.text_threshold});
                return wire::Encode(resp);
              }));
  server.Post(std::string(wire::kEmbedPath),
              Wrap([embedding](const std::string& body) {
                auto req = wire::DecodeEmbedRequest(body);
                wire::EmbedResponse resp;
                for (auto& e :
                     embedding->Embed(ImageFromBase64(req.image_b64_png),
                                      req.boxes)) {
                  resp.embeddings.push_back(std::move(e.values));
                }
                resp.dim = resp.embeddings.empty()
                               ? 0
                               : static_cast<int>(resp.embeddings[0].size());
                return wire::Encode(resp);
              }));
}

}  // namespace halloc
