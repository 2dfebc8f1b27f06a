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

#include "halloc/config.h"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "halloc/error.h"

namespace halloc {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

bool SameKind(const ordered_json& expected, const json& actual) {
  if (expected.is_number()) {
    if (expected.is_number_float()) return actual.is_number();
    return actual.is_number_integer() ||
           (actual.is_number_float() &&
            actual.get<double>() == static_cast<double>(static_cast<long long>(
                                        actual.get<double>())));
  }
  return expected.type() == actual.type();
}

// Overwrites the keys of `base` with `patch`, rejecting unknown keys and
// values of the wrong type.
void MergeStrict(ordered_json& base, const json& patch, const std::string& where) {
  if (!patch.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, where + " must be an object");
  }
  for (const auto& [key, value] : patch.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!base.contains(key)) {
      throw Error(ErrorCode::kInvalidArgument, "unknown config key '" + path + "'");
    }
    auto& slot = base[key];
    if (slot.is_object()) {
      MergeStrict(slot, value, path);
    } else if (!SameKind(slot, value)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "config key '" + path + "' expects " + slot.type_name() +
                      ", got " + value.type_name());
    } else if ((slot.is_number_integer() || slot.is_number_unsigned()) &&
               value.is_number_float()) {
      const double d = value.get<double>();
      if (d != std::floor(d)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "config key '" + path + "' expects an integer, got " + value.dump());
      }
      slot = static_cast<long long>(d);
    } else {
      slot = value;
    }
  }
}

std::string Upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

void ApplyEnv(ordered_json& doc, const EnvLookup& env) {
  for (auto& [section, body] : doc.items()) {
    for (auto& [key, slot] : body.items()) {
      const std::string name = "HALLOC_" + Upper(section) + "_" + Upper(key);
      const auto value = env(name);
      if (!value) continue;
      json parsed;
      if (slot.is_string()) {
        parsed = *value;
      } else {
        try {
          parsed = json::parse(*value);
        } catch (const json::exception&) {
          throw Error(ErrorCode::kInvalidArgument,
                      name + "='" + *value + "' is not a " + slot.type_name());
        }
      }
      json patch{{key, parsed}};
      MergeStrict(body, patch, section);
    }
  }
}

template <typename T>
T Get(const ordered_json& doc, const char* key) {
  return doc.at(key).get<T>();
}

}  // namespace

void RunConfig::Validate() const {
  backend.Validate();
  reward.Validate();
  ppo.Validate();
  if (mode == BackendMode::kHttp &&
      (backend.t2i_url.empty() || backend.ground_url.empty() ||
       backend.embed_url.empty())) {
    throw Error(ErrorCode::kInvalidArgument, "http mode needs all three backend urls");
  }
  if (!(oracle.sigma >= 0)) {
    throw Error(ErrorCode::kInvalidArgument, "oracle.sigma must be >= 0");
  }
  if (parallelism < 1) {
    throw Error(ErrorCode::kInvalidArgument, "run.parallelism must be >= 1");
  }
  if (eval.trials < 1 || eval.ks.empty() || eval.max_objects < 1 ||
      eval.variants < 1) {
    throw Error(ErrorCode::kInvalidArgument, "invalid eval section");
  }
  for (int k : eval.ks) {
    if (k < 1 || k > 64) {
      throw Error(ErrorCode::kInvalidArgument, "eval.ks entries must lie in [1, 64]");
    }
  }
  if (port < 0 || port > 65535) {
    throw Error(ErrorCode::kInvalidArgument, "service.port out of range");
  }
}

std::optional<std::string> ProcessEnv(const std::string& name) {
  const char* value = std::getenv(name.c_str());
  if (!value) return std::nullopt;
  return std::string(value);
}

ordered_json RewardConfigToJson(const RewardConfig& c) {
  return ordered_json{{"alpha", c.alpha},
                      {"beta", c.beta},
                      {"reward_clip", c.reward_clip},
                      {"max_length", c.max_length}};
}

RewardConfig RewardConfigFromJson(const json& patch) {
  ordered_json doc = RewardConfigToJson({});
  MergeStrict(doc, patch, "reward");
  RewardConfig c;
  c.alpha = Get<double>(doc, "alpha");
  c.beta = Get<double>(doc, "beta");
  c.reward_clip = Get<double>(doc, "reward_clip");
  c.max_length = Get<int>(doc, "max_length");
  c.Validate();
  return c;
}

ordered_json PpoConfigToJson(const PpoConfig& c) {
  return ordered_json{{"gamma", c.gamma},
                      {"lambda", c.lambda},
                      {"clip_range", c.clip_range},
                      {"value_clip_range", c.value_clip_range},
                      {"vf_coef", c.vf_coef},
                      {"ppo_epochs", c.ppo_epochs},
                      {"learning_rate", c.learning_rate},
                      {"minibatch_episodes", c.minibatch_episodes},
                      {"adam_beta1", c.adam_beta1},
                      {"adam_beta2", c.adam_beta2},
                      {"adam_eps", c.adam_eps},
                      {"weight_decay", c.weight_decay},
                      {"whiten_advantages", c.whiten_advantages}};
}

PpoConfig PpoConfigFromJson(const json& patch) {
  ordered_json doc = PpoConfigToJson({});
  MergeStrict(doc, patch, "ppo");
  PpoConfig c;
  c.gamma = Get<double>(doc, "gamma");
  c.lambda = Get<double>(doc, "lambda");
  c.clip_range = Get<double>(doc, "clip_range");
  c.value_clip_range = Get<double>(doc, "value_clip_range");
  c.vf_coef = Get<double>(doc, "vf_coef");
  c.ppo_epochs = Get<int>(doc, "ppo_epochs");
  c.learning_rate = Get<double>(doc, "learning_rate");
  c.minibatch_episodes = Get<int>(doc, "minibatch_episodes");
  c.adam_beta1 = Get<double>(doc, "adam_beta1");
  c.adam_beta2 = Get<double>(doc, "adam_beta2");
  c.adam_eps = Get<double>(doc, "adam_eps");
  c.weight_decay = Get<double>(doc, "weight_decay");
  c.whiten_advantages = Get<bool>(doc, "whiten_advantages");
  c.Validate();
  return c;
}

ordered_json ConfigToJson(const RunConfig& c) {
  ordered_json doc;
  doc["backend"] = {{"mode", c.mode == BackendMode::kOracle ? "oracle" : "http"},
                    {"t2i_url", c.backend.t2i_url},
                    {"ground_url", c.backend.ground_url},
                    {"embed_url", c.backend.embed_url},
                    {"timeout_ms", c.backend.timeout_ms},
                    {"retries", c.backend.retries},
                    {"backoff_ms", c.backend.backoff_ms},
                    {"reconstruction_count", c.backend.reconstruction_count},
                    {"inference_steps", c.backend.inference_steps},
                    {"box_threshold", c.backend.thresholds.box},
                    {"text_threshold", c.backend.thresholds.text},
                    {"seed_base", c.backend.seed_base},
                    {"max_in_flight", c.backend.max_in_flight}};
  doc["oracle"] = {{"sigma", c.oracle.sigma},
                   {"drop_gain", c.oracle.drop_gain},
                   {"jitter_gain", c.oracle.jitter_gain},
                   {"embed_gain", c.oracle.embed_gain},
                   {"image_size", c.oracle.image_size}};
  doc["reward"] = RewardConfigToJson(c.reward);
  doc["ppo"] = PpoConfigToJson(c.ppo);
  doc["eval"] = {{"vocabulary", c.eval.vocabulary},
                 {"corpus", c.eval.corpus},
                 {"ks", c.eval.ks},
                 {"trials", c.eval.trials},
                 {"max_objects", c.eval.max_objects},
                 {"variants", c.eval.variants}};
  doc["run"] = {{"manifest", c.manifest},
                {"scenes", c.scenes},
                {"output", c.output},
                {"parallelism", c.parallelism},
                {"seed", c.seed},
                {"record_timing", c.record_timing}};
  doc["train"] = {{"spec", c.train_spec}};
  doc["service"] = {{"host", c.host}, {"port", c.port}};
  return doc;
}

RunConfig ParseConfig(std::string_view text, const EnvLookup& env) {
  ordered_json doc = ConfigToJson(RunConfig{});
  try {
    bool blank = true;
    for (char ch : text) blank = blank && std::isspace(static_cast<unsigned char>(ch));
    if (!blank) MergeStrict(doc, json::parse(text), "");
    ApplyEnv(doc, env);

    RunConfig c;
    const auto& b = doc["backend"];
    const std::string mode = Get<std::string>(b, "mode");
    if (mode == "oracle") {
      c.mode = BackendMode::kOracle;
    } else if (mode == "http") {
      c.mode = BackendMode::kHttp;
    } else {
      throw Error(ErrorCode::kInvalidArgument,
                  "backend.mode must be 'oracle' or 'http', got '" + mode + "'");
    }
    c.backend.t2i_url = Get<std::string>(b, "t2i_url");
    c.backend.ground_url = Get<std::string>(b, "ground_url");
    c.backend.embed_url = Get<std::string>(b, "embed_url");
    c.backend.timeout_ms = Get<int>(b, "timeout_ms");
    c.backend.retries = Get<int>(b, "retries");
    c.backend.backoff_ms = Get<int>(b, "backoff_ms");
    c.backend.reconstruction_count = Get<int>(b, "reconstruction_count");
    c.backend.inference_steps = Get<int>(b, "inference_steps");
    c.backend.thresholds.box = Get<double>(b, "box_threshold");
    c.backend.thresholds.text = Get<double>(b, "text_threshold");
    c.backend.seed_base = Get<std::int64_t>(b, "seed_base");
    c.backend.max_in_flight = Get<int>(b, "max_in_flight");
    const auto& o = doc["oracle"];
    c.oracle.sigma = Get<double>(o, "sigma");
    c.oracle.drop_gain = Get<double>(o, "drop_gain");
    c.oracle.jitter_gain = Get<double>(o, "jitter_gain");
    c.oracle.embed_gain = Get<double>(o, "embed_gain");
    c.oracle.image_size = Get<int>(o, "image_size");
    c.reward = RewardConfigFromJson(json(doc["reward"]));
    c.ppo = PpoConfigFromJson(json(doc["ppo"]));
    const auto& e = doc["eval"];
    c.eval.vocabulary = Get<std::string>(e, "vocabulary");
    c.eval.corpus = Get<std::string>(e, "corpus");
    c.eval.ks = Get<std::vector<int>>(e, "ks");
    c.eval.trials = Get<int>(e, "trials");
    c.eval.max_objects = Get<int>(e, "max_objects");
    c.eval.variants = Get<int>(e, "variants");
    const auto& r = doc["run"];
    c.manifest = Get<std::string>(r, "manifest");
    c.scenes = Get<std::string>(r, "scenes");
    c.output = Get<std::string>(r, "output");
    c.parallelism = Get<int>(r, "parallelism");
    c.seed = Get<std::uint64_t>(r, "seed");
    c.record_timing = Get<bool>(r, "record_timing");
    c.train_spec = Get<std::string>(doc["train"], "spec");
    c.host = Get<std::string>(doc["service"], "host");
    c.port = Get<int>(doc["service"], "port");
    c.Validate();
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config: ") + e.what());
  }
}

RunConfig LoadConfig(const std::string& path, const EnvLookup& env) {
  if (path.empty()) return ParseConfig("", env);
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot read config " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  RunConfig config = ParseConfig(buffer.str(), env);
  // Input files named in the config resolve against its directory.
  const std::filesystem::path dir = std::filesystem::path(path).parent_path();
  for (std::string* input : {&config.manifest, &config.scenes, &config.eval.vocabulary,
                             &config.eval.corpus, &config.train_spec}) {
    if (!input->empty() && std::filesystem::path(*input).is_relative()) {
      *input = (dir / *input).lexically_normal().string();
    }
  }
  return config;
}

}  // namespace halloc
