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

// Scoring front end shared by the batch CLI and the HTTP service: resolves
// image references, runs detection and reward assembly and renders score
// lines.

#ifndef HALLOC_SERVICE_H_
#define HALLOC_SERVICE_H_

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "halloc/caption.h"
#include "halloc/config.h"
#include "halloc/gateway.h"
#include "halloc/records.h"
#include "halloc/scene.h"

namespace httplib {
class Server;
}  // namespace httplib

namespace halloc {

class Scorer {
 public:
  Scorer(RunConfig config, std::shared_ptr<TextToImageBackend> t2i,
         std::shared_ptr<GroundingBackend> grounding,
         std::shared_ptr<EmbeddingBackend> embedding,
         std::vector<SceneGraph> scenes = {});

  // Oracle or HTTP backends per config.mode; scenes load from config.scenes.
  static std::unique_ptr<Scorer> FromConfig(const RunConfig& config);

  // Throws Error on any failure.
  ScoreRecordLine Score(const ScoreRequest& request);
  // Parses and scores one manifest line. Never throws: failures render as
  // error records and set *ok to false.
  std::string ScoreLine(std::string_view line, bool* ok);
  bool Healthy();

  ImageRef ResolveImage(const ImageSpec& spec) const;
  const RunConfig& config() const { return config_; }
  ModelGateway& gateway() { return gateway_; }
  std::shared_ptr<TextToImageBackend> t2i() const { return t2i_; }
  std::shared_ptr<GroundingBackend> grounding() const { return grounding_; }
  std::shared_ptr<EmbeddingBackend> embedding() const { return embedding_; }

 private:
  RunConfig config_;
  std::shared_ptr<TextToImageBackend> t2i_;
  std::shared_ptr<GroundingBackend> grounding_;
  std::shared_ptr<EmbeddingBackend> embedding_;
  ModelGateway gateway_;
  std::map<std::string, SceneGraph> scenes_;
  RuleBasedChunker chunker_;
};

struct BatchResult {
  long lines = 0;
  long failed = 0;
};

// Scores every non-blank manifest line with up to config.parallelism lines
// in flight and writes one output line per input line, in input order.
// Throws kInvalidArgument when the manifest cannot be read.
BatchResult ScoreManifest(Scorer& scorer, const std::string& manifest_path,
                          std::ostream& out);

// POST /v1/score and GET /v1/healthz. With `model_routes` the scorer's
// backends are also served under the model wire protocol.
void MountScoreRoutes(httplib::Server& server, Scorer& scorer,
                      bool model_routes = false);

}  // namespace halloc

#endif  // HALLOC_SERVICE_H_
