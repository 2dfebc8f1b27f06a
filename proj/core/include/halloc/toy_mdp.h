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

// Toy caption-generation MDP used to exercise the full reward path: a
// tabular policy emits whole sentences, the caption is scored by the
// detector against an oracle scene, penalties are mapped back onto the
// sentence actions and the policy is updated with fine-grained PPO.

#ifndef HALLOC_TOY_MDP_H_
#define HALLOC_TOY_MDP_H_

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "halloc/oracle.h"
#include "halloc/ppo.h"
#include "halloc/reward.h"
#include "halloc/scene.h"

namespace halloc {

struct ToyMdpSpec {
  SceneGraph scene;
  // Action i appends actions[i] to the caption. Action eos_action ends the
  // episode and contributes no text.
  std::vector<std::string> actions;
  int eos_action = 0;
  // The action whose emission rate training must suppress.
  int hallucination_action = 3;
  int max_actions = 4;
  int context = 1;
  int batch_episodes = 16;
  int updates = 200;
  std::uint64_t seed = 0;
  int k = 4;
  RewardConfig reward;
  PpoConfig ppo;

  // Red ball left of a blue box; one action hallucinates a green clock and
  // one alters the ball's color.
  static ToyMdpSpec Default();
  static ToyMdpSpec FromJson(std::string_view text);
  std::string ToJson() const;
  // Throws kInvalidArgument on inconsistent indices or sizes.
  void Validate() const;
};

// Expected share of emitted actions (including the end action) that equal
// `target` over one episode of at most `max_actions` steps, computed
// exactly by dynamic programming over the policy states.
double EmissionRate(const ToyPolicy& policy, int eos_action, int target,
                    int max_actions);

struct StepMetrics {
  int step = 0;
  double hallucination_rate = 0;  // after the update
  double mean_return = 0;
  double mean_length = 0;
  double policy_loss = 0;
  double value_loss = 0;
  double mean_kl = 0;  // mean logp_policy - logp_ref over sampled actions

  std::string ToJson() const;
};

class ToyTrainer {
 public:
  explicit ToyTrainer(ToyMdpSpec spec);

  // Samples a batch, scores it and applies one PPO update.
  StepMetrics Step();

  const ToyPolicy& policy() const { return policy_; }
  const ToyMdpSpec& spec() const { return spec_; }
  int steps_done() const { return steps_; }
  double HallucinationRate() const;

  std::string Caption(const std::vector<int>& actions) const;
  // Per-action rewards of one sampled episode.
  std::vector<double> ScoreEpisode(const Episode& episode);

 private:
  // Penalties and r_rec of a caption, keyed by action position.
  struct CaptionScore {
    std::map<int, std::vector<PenaltyRecord>> by_action;
    double r_rec = 0;
  };
  const CaptionScore& ScoreCaption(const std::vector<int>& actions);

  ToyMdpSpec spec_;
  ToyPolicy policy_;
  ToyPolicy reference_;
  AdamOptimizer optimizer_;
  std::mt19937_64 rng_;
  std::shared_ptr<OracleBackend> backend_;
  std::unique_ptr<ModelGateway> gateway_;
  ImageRef original_;
  std::map<std::vector<int>, CaptionScore> cache_;
  int steps_ = 0;
};

}  // namespace halloc

#endif  // HALLOC_TOY_MDP_H_
