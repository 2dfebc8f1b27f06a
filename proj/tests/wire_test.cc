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

#include <functional>
#include <map>
#include <string>

#include "gtest/gtest.h"
#include "halloc/detection.h"
#include "halloc/error.h"
#include "halloc/http_backend.h"
#include "halloc/oracle.h"
#include "halloc/records.h"
#include "halloc/schema.h"
#include "test_util.h"

namespace halloc {
namespace {

using testing::Golden;
using testing::LocalServer;

struct GoldenCase {
  std::string file;
  std::string schema;
  std::function<std::string(const std::string&)> round_trip;
};

std::vector<GoldenCase> GoldenCases() {
  return {
      {"t2i_request.json", "t2i_request",
       [](const std::string& s) { return wire::Encode(wire::DecodeT2IRequest(s)); }},
      {"t2i_response.json", "t2i_response",
       [](const std::string& s) { return wire::Encode(wire::DecodeT2IResponse(s)); }},
      {"ground_request.json", "ground_request",
       [](const std::string& s) { return wire::Encode(wire::DecodeGroundRequest(s)); }},
      {"ground_response.json", "ground_response",
       [](const std::string& s) { return wire::Encode(wire::DecodeGroundResponse(s)); }},
      {"ground_response_empty.json", "ground_response",
       [](const std::string& s) { return wire::Encode(wire::DecodeGroundResponse(s)); }},
      {"embed_request.json", "embed_request",
       [](const std::string& s) { return wire::Encode(wire::DecodeEmbedRequest(s)); }},
      {"embed_response.json", "embed_response",
       [](const std::string& s) { return wire::Encode(wire::DecodeEmbedResponse(s)); }},
      {"error.json", "error",
       [](const std::string& s) { return wire::Encode(wire::DecodeErrorEnvelope(s)); }},
      {"score_request.json", "score_request",
       [](const std::string& s) { return EncodeScoreRequest(ParseScoreRequest(s)); }},
      {"score_record.json", "score_record",
       [](const std::string& s) { return EncodeScoreRecord(DecodeScoreRecord(s)); }},
  };
}

TEST(WireGoldenTest, RoundTripIsByteIdentical) {
  for (const auto& c : GoldenCases()) {
    const std::string payload = Golden("wire/" + c.file);
    ASSERT_FALSE(payload.empty()) << c.file;
    EXPECT_EQ(c.round_trip(payload), payload) << c.file;
  }
}

TEST(WireGoldenTest, PayloadsMatchSharedSchemas) {
  for (const auto& c : GoldenCases()) {
    const auto errors = ValidateDocument(c.schema, Golden("wire/" + c.file));
    EXPECT_TRUE(errors.empty()) << c.file << ": " << errors.front();
  }
}

void ExpectProtocolError(const std::function<void()>& fn, const std::string& label) {
  try {
    fn();
    ADD_FAILURE() << label << ": expected a protocol error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProtocol) << label << ": " << e.what();
  }
}

TEST(WireDecodeTest, IsStrict) {
  ExpectProtocolError([] { wire::DecodeT2IRequest(R"({"prompt":"a","n":1,"seeds":[0]})"); },
                      "missing steps");
  ExpectProtocolError(
      [] { wire::DecodeT2IRequest(R"({"prompt":"a","n":1,"seeds":[0],"steps":4,"x":1})"); },
      "unknown field");
  ExpectProtocolError(
      [] { wire::DecodeT2IRequest(R"({"prompt":"a","n":2,"seeds":[0],"steps":4})"); },
      "n differs from seeds");
  ExpectProtocolError(
      [] { wire::DecodeT2IRequest(R"({"prompt":7,"n":1,"seeds":[0],"steps":4})"); },
      "mistyped prompt");
  ExpectProtocolError(
      [] {
        wire::DecodeGroundResponse(
            R"({"detections":[{"phrase":"a","box":[0.5,0,0.4,1],"score":0.5}]})");
      },
      "inverted box");
  ExpectProtocolError(
      [] {
        wire::DecodeGroundResponse(
            R"({"detections":[{"phrase":"a","box":[0,0,1,1],"score":1.5}]})");
      },
      "score above one");
  ExpectProtocolError(
      [] { wire::DecodeEmbedResponse(R"({"embeddings":[[1,0],[1]],"dim":2})"); },
      "ragged embeddings");
  ExpectProtocolError([] { wire::DecodeErrorEnvelope("not json"); }, "not json");
}

TEST(WireDecodeTest, ErrorsQuoteThePayload) {
  try {
    wire::DecodeT2IRequest(R"({"prompt":"zebra crossing","n":1})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("zebra crossing"), std::string::npos);
  }
}

TEST(SchemaTest, ReportsViolations) {
  EXPECT_FALSE(ValidateDocument("t2i_request", R"({"prompt":"a","n":0,"seeds":[],"steps":4})")
                   .empty());
  EXPECT_FALSE(ValidateDocument("score_request",
                                R"({"id":"x","image":{"path":"a","scene_id":"b"},"caption":""})")
                   .empty());
  EXPECT_FALSE(ValidateDocument("embed_request", R"({"image_b64_png":"x","boxes":[[0,0,2,1]]})")
                   .empty());
  EXPECT_TRUE(ValidateDocument("embed_request", R"({"image_b64_png":"x","boxes":[[0,0,1,1]]})")
                  .empty());
  EXPECT_THROW(ValidateDocument("no_such_schema", "{}"), Error);
}

// The oracle served over HTTP must give the same report as in process.
class HttpRoundTripTest : public ::testing::Test {
 protected:
  void SetUp() override {
    oracle_ = std::make_shared<OracleBackend>();
    MountModelRoutes(server_.server(), oracle_, oracle_, oracle_);
    server_.server().Get(std::string(wire::kHealthPath),
                         [](const httplib::Request&, httplib::Response& res) {
                           res.set_content("{}", "application/json");
                         });
    server_.Start();
  }

  BackendConfig RemoteConfig() const {
    BackendConfig config;
    config.t2i_url = config.ground_url = config.embed_url = server_.url();
    config.backoff_ms = 1;
    return config;
  }

  LocalServer server_;
  std::shared_ptr<OracleBackend> oracle_;
};

TEST_F(HttpRoundTripTest, DetectMatchesInProcess) {
  const auto scenes = EnumerateSceneFamily(3, 2);
  const auto cases = EnumerateFamilyCases({scenes.back()});
  ModelGateway remote(RemoteConfig(), std::make_shared<HttpBackend>(RemoteConfig()));
  ModelGateway local(BackendConfig{}, oracle_);
  EXPECT_TRUE(remote.Probe());
  const RuleBasedChunker chunker;
  for (const auto& c : cases) {
    const ImageRef image = OracleBackend::RenderScene(c.scene);
    const auto a = Detect(c.caption, image, remote, chunker);
    const auto b = Detect(c.caption, image, local, chunker);
    ASSERT_EQ(a.penalties.size(), b.penalties.size()) << c.caption;
    for (std::size_t i = 0; i < a.penalties.size(); ++i) {
      EXPECT_EQ(a.penalties[i].token, b.penalties[i].token);
      EXPECT_EQ(a.penalties[i].kind, b.penalties[i].kind);
      EXPECT_DOUBLE_EQ(a.penalties[i].value, b.penalties[i].value);
    }
    EXPECT_DOUBLE_EQ(a.r_rec, b.r_rec);
  }
}

TEST_F(HttpRoundTripTest, MalformedRequestGetsErrorEnvelope) {
  httplib::Client client(server_.url());
  httplib::Headers headers = {{std::string(wire::kRequestIdHeader), "req-42"}};
  auto res = client.Post(std::string(wire::kT2IPath), headers,
                         R"({"prompt":"a dog","n":1,"seeds":[0],"steps":4,"extra":1})",
                         "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(res->get_header_value(std::string(wire::kRequestIdHeader)), "req-42");
  const auto envelope = wire::DecodeErrorEnvelope(res->body);
  EXPECT_EQ(envelope.code, "protocol");
  EXPECT_TRUE(ValidateDocument("error", res->body).empty());
}

TEST_F(HttpRoundTripTest, ResponsesMatchSchemas) {
  httplib::Client client(server_.url());
  auto t2i = client.Post(std::string(wire::kT2IPath), Golden("wire/t2i_request.json"),
                         "application/json");
  ASSERT_TRUE(t2i);
  ASSERT_EQ(t2i->status, 200) << t2i->body;
  EXPECT_TRUE(ValidateDocument("t2i_response", t2i->body).empty());
  const auto images = wire::DecodeT2IResponse(t2i->body).images;
  EXPECT_EQ(images.size(), 4u);

  const std::string image = images.front().b64_png;
  const std::string embed_body =
      wire::Encode(wire::EmbedRequest{image, {BBox::Full(), BBox{0, 0, 0.5, 0.5}}});
  auto embed = client.Post(std::string(wire::kEmbedPath), embed_body, "application/json");
  ASSERT_TRUE(embed);
  ASSERT_EQ(embed->status, 200) << embed->body;
  EXPECT_TRUE(ValidateDocument("embed_response", embed->body).empty());
  for (const auto& v : wire::DecodeEmbedResponse(embed->body).embeddings) {
    double norm2 = 0;
    for (double x : v) norm2 += x * x;
    EXPECT_NEAR(norm2, 1.0, 1e-12);
  }
  const std::string ground_body =
      wire::Encode(wire::GroundRequest{image, {"elderly man", "guide dog"}, 0.35, 0.25});
  auto ground = client.Post(std::string(wire::kGroundPath), ground_body, "application/json");
  ASSERT_TRUE(ground);
  ASSERT_EQ(ground->status, 200) << ground->body;
  EXPECT_TRUE(ValidateDocument("ground_response", ground->body).empty());
}

TEST(HttpBackendTest, UnreachableBackendIsTransportError) {
  BackendConfig config;
  config.t2i_url = config.ground_url = config.embed_url = "http://127.0.0.1:1";
  config.timeout_ms = 200;
  config.backoff_ms = 1;
  auto backend = std::make_shared<HttpBackend>(config);
  EXPECT_FALSE(backend->Probe());
  ModelGateway gateway(config, backend);
  const std::vector<std::int64_t> seeds = {0};
  try {
    gateway.Reconstruct("a dog", seeds);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTransport);
    EXPECT_NE(std::string(e.what()).find("attempt 3"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace halloc
