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

#include "halloc/toy_mdp.h"

#include <cmath>
#include <utility>

#include "halloc/config.h"
#include "halloc/detection.h"
#include "halloc/error.h"
#include "json.hpp"

namespace halloc {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

SceneObject MakeObject(int id, std::string label, std::set<std::string> attributes,
                       double x, double y) {
  SceneObject o;
  o.id = id;
  o.label = std::move(label);
  o.attributes = std::move(attributes);
  o.center = {x, y};
  o.width = o.height = 0.2;
  return o;
}

}  // namespace

ToyMdpSpec ToyMdpSpec::Default() {
  ToyMdpSpec spec;
  spec.scene.id = "toy";
  spec.scene.objects = {MakeObject(0, "ball", {"red"}, 0.3, 0.5),
                        MakeObject(1, "box", {"blue"}, 0.7, 0.5)};
  spec.actions = {"",
                  "A red ball.",
                  "A blue box.",
                  "A green clock.",
                  "A red ball is to the left of a blue box.",
                  "A blue ball."};
  spec.eos_action = 0;
  spec.hallucination_action = 3;
  return spec;
}

void ToyMdpSpec::Validate() const {
  scene.Validate();
  const int n = static_cast<int>(actions.size());
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "toy MDP needs two actions");
  if (eos_action < 0 || eos_action >= n || hallucination_action < 0 ||
      hallucination_action >= n || hallucination_action == eos_action) {
    throw Error(ErrorCode::kInvalidArgument, "toy MDP action index out of range");
  }
  if (!actions[eos_action].empty()) {
    throw Error(ErrorCode::kInvalidArgument, "the end action must carry no text");
  }
  if (max_actions < 1 || context < 1 || batch_episodes < 1 || updates < 0 ||
      k < 1) {
    throw Error(ErrorCode::kInvalidArgument, "invalid toy MDP sizes");
  }
  reward.Validate();
  ppo.Validate();
}

std::string ToyMdpSpec::ToJson() const {
  ordered_json doc;
  doc["scene"] = json::parse(SceneToJson(scene));
  doc["actions"] = actions;
  doc["eos_action"] = eos_action;
  doc["hallucination_action"] = hallucination_action;
  doc["max_actions"] = max_actions;
  doc["context"] = context;
  doc["batch_episodes"] = batch_episodes;
  doc["updates"] = updates;
  doc["seed"] = seed;
  doc["k"] = k;
  doc["reward"] = RewardConfigToJson(reward);
  doc["ppo"] = PpoConfigToJson(ppo);
  return doc.dump(2) + "\n";
}

ToyMdpSpec ToyMdpSpec::FromJson(std::string_view text) {
  ToyMdpSpec spec = Default();
  try {
    const json doc = json::parse(text);
    for (const auto& [key, value] : doc.items()) {
      if (key == "scene") {
        spec.scene = SceneFromJson(value.dump());
      } else if (key == "actions") {
        spec.actions = value.get<std::vector<std::string>>();
      } else if (key == "eos_action") {
        spec.eos_action = value.get<int>();
      } else if (key == "hallucination_action") {
        spec.hallucination_action = value.get<int>();
      } else if (key == "max_actions") {
        spec.max_actions = value.get<int>();
      } else if (key == "context") {
        spec.context = value.get<int>();
      } else if (key == "batch_episodes") {
        spec.batch_episodes = value.get<int>();
      } else if (key == "updates") {
        spec.updates = value.get<int>();
      } else if (key == "seed") {
        spec.seed = value.get<std::uint64_t>();
      } else if (key == "k") {
        spec.k = value.get<int>();
      } else if (key == "reward") {
        spec.reward = RewardConfigFromJson(value);
      } else if (key == "ppo") {
        spec.ppo = PpoConfigFromJson(value);
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown toy MDP key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("toy MDP spec: ") + e.what());
  }
  spec.Validate();
  return spec;
}

double EmissionRate(const ToyPolicy& policy, int eos_action, int target,
                    int max_actions) {
  std::vector<double> alive(policy.num_states(), 0.0);
  alive[policy.initial_state()] = 1.0;
  double emitted = 0;
  double hits = 0;
  for (int t = 0; t < max_actions; ++t) {
    std::vector<double> next(policy.num_states(), 0.0);
    for (int s = 0; s < policy.num_states(); ++s) {
      if (alive[s] == 0) continue;
      const auto probs = policy.Probs(s);
      emitted += alive[s];
      hits += alive[s] * probs[target];
      for (int a = 0; a < policy.vocab_size(); ++a) {
        if (a != eos_action) next[policy.NextState(s, a)] += alive[s] * probs[a];
      }
    }
    alive = std::move(next);
  }
  return emitted > 0 ? hits / emitted : 0.0;
}

std::string StepMetrics::ToJson() const {
  return ordered_json{{"step", step},
                      {"hallucination_rate", hallucination_rate},
                      {"mean_return", mean_return},
                      {"mean_length", mean_length},
                      {"policy_loss", policy_loss},
                      {"value_loss", value_loss},
                      {"mean_kl", mean_kl}}
      .dump();
}

ToyTrainer::ToyTrainer(ToyMdpSpec spec)
    : spec_((spec.Validate(), std::move(spec))),
      policy_(static_cast<int>(spec_.actions.size()), spec_.context),
      reference_(policy_),
      optimizer_(spec_.ppo),
      rng_(spec_.seed),
      backend_(std::make_shared<OracleBackend>()),
      original_(OracleBackend::RenderScene(spec_.scene)) {
  BackendConfig config;
  config.reconstruction_count = spec_.k;
  config.seed_base = static_cast<std::int64_t>(spec_.seed);
  gateway_ = std::make_unique<ModelGateway>(config, backend_);
}

double ToyTrainer::HallucinationRate() const {
  return EmissionRate(policy_, spec_.eos_action, spec_.hallucination_action,
                      spec_.max_actions);
}

std::string ToyTrainer::Caption(const std::vector<int>& actions) const {
  std::string caption;
  for (int a : actions) {
    const std::string& piece = spec_.actions.at(a);
    if (piece.empty()) continue;
    if (!caption.empty()) caption += " ";
    caption += piece;
  }
  return caption;
}

const ToyTrainer::CaptionScore& ToyTrainer::ScoreCaption(
    const std::vector<int>& actions) {
  auto it = cache_.find(actions);
  if (it != cache_.end()) return it->second;
  CaptionScore score;
  // Character span of each action inside the caption.
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::size_t offset = 0;
  bool any = false;
  for (int a : actions) {
    const std::string& piece = spec_.actions[a];
    if (piece.empty()) {
      spans.emplace_back(offset, offset);
      continue;
    }
    if (any) ++offset;
    spans.emplace_back(offset, offset + piece.size());
    offset += piece.size();
    any = true;
  }
  const std::string caption = Caption(actions);
  if (!caption.empty()) {
    DetectOptions options;
    options.parallel = false;
    const DetectionReport report =
        Detect(caption, original_, *gateway_, RuleBasedChunker{}, options);
    for (const auto& rec : report.penalties) {
      const std::size_t begin = report.tokens[rec.token].begin;
      for (std::size_t i = 0; i < spans.size(); ++i) {
        if (begin >= spans[i].first && begin < spans[i].second) {
          score.by_action[static_cast<int>(i)].push_back(rec);
          break;
        }
      }
    }
    score.r_rec = report.r_rec;
  }
  return cache_.emplace(actions, std::move(score)).first->second;
}

std::vector<double> ToyTrainer::ScoreEpisode(const Episode& episode) {
  const CaptionScore& score = ScoreCaption(episode.actions);
  DetectionReport mapped;
  mapped.r_rec = score.r_rec;
  for (const auto& [action, records] : score.by_action) {
    for (PenaltyRecord rec : records) {
      rec.token = action;
      mapped.penalties.push_back(std::move(rec));
    }
  }
  return AssembleRewards(mapped, episode.logp_old, episode.logp_ref, spec_.reward).r;
}

StepMetrics ToyTrainer::Step() {
  TrajectoryBatch batch;
  StepMetrics metrics;
  double kl = 0;
  long tokens = 0;
  for (int e = 0; e < spec_.batch_episodes; ++e) {
    Episode ep = SampleEpisode(policy_, reference_, spec_.eos_action,
                               spec_.max_actions, rng_);
    ep.rewards = ScoreEpisode(ep);
    for (std::size_t t = 0; t < ep.size(); ++t) {
      metrics.mean_return += ep.rewards[t];
      kl += ep.logp_old[t] - ep.logp_ref[t];
    }
    tokens += static_cast<long>(ep.size());
    batch.episodes.push_back(std::move(ep));
  }
  const UpdateStats stats = PpoUpdate(policy_, batch, spec_.ppo, optimizer_);
  ++steps_;
  metrics.step = steps_;
  metrics.mean_return /= spec_.batch_episodes;
  metrics.mean_length = static_cast<double>(tokens) / spec_.batch_episodes;
  metrics.mean_kl = kl / static_cast<double>(tokens);
  metrics.policy_loss = stats.policy_loss.empty() ? 0 : stats.policy_loss.back();
  metrics.value_loss = stats.value_loss.empty() ? 0 : stats.value_loss.back();
  metrics.hallucination_rate = HallucinationRate();
  return metrics;
}

}  // namespace halloc
