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

// Run configuration: one JSON document with a section per module. Any key
// can be overridden from the environment as HALLOC_<SECTION>_<KEY>, for
// example HALLOC_REWARD_ALPHA=0.5.

#ifndef HALLOC_CONFIG_H_
#define HALLOC_CONFIG_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "halloc/gateway.h"
#include "halloc/oracle.h"
#include "halloc/ppo.h"
#include "halloc/reward.h"
#include "json.hpp"

namespace halloc {

enum class BackendMode { kOracle, kHttp };

struct EvalConfig {
  std::string vocabulary;  // object vocabulary file; empty: built-in
  std::string corpus;      // CHAIR corpus (JSONL); empty: synthetic
  std::vector<int> ks = {1, 2, 4};
  int trials = 1000;
  int max_objects = 5;
  int variants = 8;
};

struct RunConfig {
  BackendMode mode = BackendMode::kOracle;
  BackendConfig backend;
  OracleOptions oracle;
  RewardConfig reward;
  PpoConfig ppo;
  EvalConfig eval;
  std::string manifest;
  std::string scenes;  // scene file backing scene_id image references
  std::string output;
  int parallelism = 4;
  std::uint64_t seed = 0;
  // Wall-clock timings in score records; off keeps outputs replayable.
  bool record_timing = false;
  std::string train_spec;  // toy MDP spec file; empty: built-in
  std::string host = "127.0.0.1";
  int port = 8080;

  void Validate() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

// Reads the process environment.
std::optional<std::string> ProcessEnv(const std::string& name);

// Parses `text` (empty: all defaults) and applies environment overrides.
// Unknown sections or keys and mistyped values are kInvalidArgument.
RunConfig ParseConfig(std::string_view text, const EnvLookup& env = ProcessEnv);
// Reads `path` (empty: all defaults) and calls ParseConfig. Relative input
// paths (manifest, scenes, vocabulary, corpus, train spec) resolve against
// the directory of `path`.
RunConfig LoadConfig(const std::string& path, const EnvLookup& env = ProcessEnv);
nlohmann::ordered_json ConfigToJson(const RunConfig& config);

nlohmann::ordered_json RewardConfigToJson(const RewardConfig& config);
RewardConfig RewardConfigFromJson(const nlohmann::json& doc);
nlohmann::ordered_json PpoConfigToJson(const PpoConfig& config);
PpoConfig PpoConfigFromJson(const nlohmann::json& doc);

}  // namespace halloc

#endif  // HALLOC_CONFIG_H_
