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

// Desk-scale fine-grained PPO over per-token rewards: GAE, the clipped
// policy surrogate, the clipped value loss and an Adam update of a tabular
// softmax policy with a tabular value head.

#ifndef HALLOC_PPO_H_
#define HALLOC_PPO_H_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace halloc {

struct PpoConfig {
  double gamma = 1.0;
  double lambda = 0.95;
  double clip_range = 0.2;
  double value_clip_range = 0.2;
  double vf_coef = 1.0;
  int ppo_epochs = 4;
  // Harness-level settings.
  double learning_rate = 0.05;
  int minibatch_episodes = 0;  // 0: whole batch per gradient step
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.0;
  bool whiten_advantages = false;

  void Validate() const;
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// delta_t = r_t + gamma * V(s_{t+1}) - V(s_t) with V(s_T) = 0,
// A_t = delta_t + gamma * lambda * A_{t+1}, returns = A + V.
GaeResult ComputeGae(std::span<const double> rewards,
                     std::span<const double> values, double gamma,
                     double lambda);

struct LossAndGrad {
  double loss = 0;
  std::vector<double> grad;  // d loss / d input, per token
};

// mean_t -min(rho_t A_t, clip(rho_t, 1-eps, 1+eps) A_t), rho = exp(new-old).
// The gradient is taken with respect to logp_new.
LossAndGrad PolicyLoss(std::span<const double> logp_new,
                       std::span<const double> logp_old,
                       std::span<const double> advantages, double clip_range);

// 0.5 * mean_t max((v - R)^2, (clip(v, v_old - eps, v_old + eps) - R)^2).
// The gradient is taken with respect to values_new.
LossAndGrad ValueLoss(std::span<const double> values_new,
                      std::span<const double> values_old,
                      std::span<const double> returns, double clip_range);

// Tabular softmax policy over a small vocabulary, conditioned on the last
// `context` actions (shorter prefixes are padded with a begin marker), plus
// a tabular value head over the same states.
class ToyPolicy {
 public:
  ToyPolicy(int vocab_size, int context);

  int vocab_size() const { return vocab_; }
  int context() const { return context_; }
  int num_states() const { return num_states_; }
  int initial_state() const { return 0; }
  int NextState(int state, int action) const;

  std::vector<double> Probs(int state) const;
  double LogProb(int state, int action) const;
  double Value(int state) const { return values_[state]; }

  double& logit(int state, int action) {
    return logits_[state * vocab_ + action];
  }
  double logit(int state, int action) const {
    return logits_[state * vocab_ + action];
  }
  double& value(int state) { return values_[state]; }

  // Flattened parameters: logits (states x vocab) followed by values.
  std::vector<double> Parameters() const;
  void SetParameters(std::span<const double> params);
  std::size_t num_parameters() const {
    return logits_.size() + values_.size();
  }

  std::string ToJson() const;
  static ToyPolicy FromJson(const std::string& text);

 private:
  int vocab_;
  int context_;
  int num_states_;
  std::vector<double> logits_;
  std::vector<double> values_;
};

struct Episode {
  std::vector<int> states;  // s_t, encoded by ToyPolicy
  std::vector<int> actions;
  std::vector<double> logp_old;
  std::vector<double> logp_ref;
  std::vector<double> values;  // V(s_t) at rollout
  std::vector<double> rewards;
  std::vector<bool> terminal;  // true exactly at the last step

  std::size_t size() const { return actions.size(); }
  void Validate() const;
};

struct TrajectoryBatch {
  std::vector<Episode> episodes;
};

// Samples one episode; `eos_action` ends it early, otherwise it is truncated
// after `max_steps` actions. Rewards are left zero.
Episode SampleEpisode(const ToyPolicy& policy, const ToyPolicy& reference,
                      int eos_action, int max_steps, std::mt19937_64& rng);

// Advantages and returns for every token of the batch, flattened in episode
// order, computed from the rollout values.
GaeResult BatchAdvantages(const TrajectoryBatch& batch, const PpoConfig& config);

// policy_loss + vf_coef * value_loss over `episodes` of the batch and its
// gradient with respect to ToyPolicy::Parameters().
struct ObjectiveEval {
  double policy_loss = 0;
  double value_loss = 0;
  double total = 0;
  std::vector<double> grad;
};
ObjectiveEval EvaluateObjective(const ToyPolicy& policy,
                                const TrajectoryBatch& batch,
                                const GaeResult& targets,
                                const PpoConfig& config);

class AdamOptimizer {
 public:
  explicit AdamOptimizer(const PpoConfig& config) : config_(config) {}
  void Step(std::vector<double>& params, std::span<const double> grad);

 private:
  PpoConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  long step_ = 0;
};

struct UpdateStats {
  std::vector<double> total_loss;  // one entry per gradient step
  std::vector<double> policy_loss;
  std::vector<double> value_loss;
};

// ppo_epochs passes over the batch. Throws Error(kDivergence) if the loss
// or the parameters become non-finite; the policy is left at its last
// finite state.
UpdateStats PpoUpdate(ToyPolicy& policy, const TrajectoryBatch& batch,
                      const PpoConfig& config, AdamOptimizer& optimizer);

}  // namespace halloc

#endif  // HALLOC_PPO_H_
