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

#ifndef HALLOC_HTTP_BACKEND_H_
#define HALLOC_HTTP_BACKEND_H_

#include <atomic>
#include <functional>
#include <memory>
#include <string>

#include "halloc/error.h"
#include "halloc/gateway.h"

namespace httplib {
class Server;
}  // namespace httplib

namespace halloc {

// Remote backend speaking the wire protocol. One attempt per call; the
// gateway owns retries. Connection failures, timeouts and 5xx replies map to
// kTransport, everything else that goes wrong to kProtocol.
class HttpBackend : public TextToImageBackend,
                    public GroundingBackend,
                    public EmbeddingBackend {
 public:
  explicit HttpBackend(BackendConfig config);

  std::vector<ImageRef> Generate(const std::string& prompt,
                                 std::span<const std::int64_t> seeds,
                                 int steps) override;
  std::vector<Detection> Ground(const ImageRef& image,
                                const std::vector<std::string>& phrases,
                                const GroundingThresholds& thresholds) override;
  std::vector<Embedding> Embed(const ImageRef& image,
                               std::span<const BBox> boxes) override;
  bool Probe() override;

 private:
  std::string Post(const std::string& base_url, std::string_view path,
                   const std::string& body);

  BackendConfig config_;
  std::atomic<std::uint64_t> next_id_{1};
};

// Serves /v1/t2i, /v1/ground and /v1/embed from in-process backends and
// echoes the request-id header.
void MountModelRoutes(httplib::Server& server,
                      std::shared_ptr<TextToImageBackend> t2i,
                      std::shared_ptr<GroundingBackend> grounding,
                      std::shared_ptr<EmbeddingBackend> embedding);

// POST route whose handler maps a request body to a JSON reply. Errors
// become an error envelope with HttpStatusFor; the request-id header is
// echoed.
void MountJsonRoute(httplib::Server& server, const std::string& path,
                    std::function<std::string(const std::string&)> handler);

// HTTP status for an error raised while serving a request.
int HttpStatusFor(const Error& e);

}  // namespace halloc

#endif  // HALLOC_HTTP_BACKEND_H_
