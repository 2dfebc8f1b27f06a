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

#include "halloc/ppo.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "halloc/error.h"
#include "json.hpp"

namespace halloc {
namespace {

void CheckSameLength(std::size_t a, std::size_t b, std::size_t c,
                     const char* what) {
  if (a != b || a != c) {
    throw Error(ErrorCode::kLengthMismatch,
                std::string(what) + ": inputs differ in length");
  }
}

}  // namespace

void PpoConfig::Validate() const {
  if (!(gamma > 0 && gamma <= 1)) {
    throw Error(ErrorCode::kInvalidArgument, "gamma must lie in (0, 1]");
  }
  if (!(lambda >= 0 && lambda <= 1)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda must lie in [0, 1]");
  }
  if (!(clip_range > 0) || !(value_clip_range > 0) || !(vf_coef >= 0) ||
      ppo_epochs < 0 || !(learning_rate > 0) || minibatch_episodes < 0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid PPO configuration");
  }
}

GaeResult ComputeGae(std::span<const double> rewards,
                     std::span<const double> values, double gamma,
                     double lambda) {
  if (rewards.size() != values.size()) {
    throw Error(ErrorCode::kLengthMismatch, "gae: rewards and values differ");
  }
  if (rewards.empty()) throw Error(ErrorCode::kEmptyInput, "gae: empty episode");
  const std::size_t T = rewards.size();
  GaeResult out;
  out.advantages.assign(T, 0.0);
  out.returns.assign(T, 0.0);
  double next_adv = 0;
  for (std::size_t i = T; i-- > 0;) {
    const double next_value = i + 1 < T ? values[i + 1] : 0.0;
    const double delta = rewards[i] + gamma * next_value - values[i];
    next_adv = delta + gamma * lambda * next_adv;
    out.advantages[i] = next_adv;
    out.returns[i] = next_adv + values[i];
  }
  return out;
}

LossAndGrad PolicyLoss(std::span<const double> logp_new,
                       std::span<const double> logp_old,
                       std::span<const double> advantages, double clip_range) {
  CheckSameLength(logp_new.size(), logp_old.size(), advantages.size(),
                  "policy_loss");
  LossAndGrad out;
  const std::size_t n = logp_new.size();
  out.grad.assign(n, 0.0);
  if (n == 0) return out;
  for (std::size_t t = 0; t < n; ++t) {
    const double ratio = std::exp(logp_new[t] - logp_old[t]);
    if (!std::isfinite(ratio)) {
      throw Error(ErrorCode::kNonFinite, "policy_loss: non-finite ratio");
    }
    const double a = advantages[t];
    const double unclipped = ratio * a;
    const double clipped =
        std::clamp(ratio, 1 - clip_range, 1 + clip_range) * a;
    if (unclipped <= clipped) {
      out.loss -= unclipped;
      out.grad[t] = -unclipped / n;
    } else {
      out.loss -= clipped;
    }
  }
  out.loss /= n;
  return out;
}

LossAndGrad ValueLoss(std::span<const double> values_new,
                      std::span<const double> values_old,
                      std::span<const double> returns, double clip_range) {
  CheckSameLength(values_new.size(), values_old.size(), returns.size(),
                  "value_loss");
  LossAndGrad out;
  const std::size_t n = values_new.size();
  out.grad.assign(n, 0.0);
  if (n == 0) return out;
  for (std::size_t t = 0; t < n; ++t) {
    const double step = values_new[t] - values_old[t];
    const double v_clip =
        values_old[t] + std::clamp(step, -clip_range, clip_range);
    const double a = values_new[t] - returns[t];
    const double b = v_clip - returns[t];
    if (!std::isfinite(a) || !std::isfinite(b)) {
      throw Error(ErrorCode::kNonFinite, "value_loss: non-finite input");
    }
    if (a * a >= b * b) {
      out.loss += a * a;
      out.grad[t] = a / n;
    } else {
      out.loss += b * b;
      const bool inside = std::abs(step) < clip_range;
      out.grad[t] = inside ? b / n : 0.0;
    }
  }
  out.loss = 0.5 * out.loss / n;
  return out;
}

ToyPolicy::ToyPolicy(int vocab_size, int context)
    : vocab_(vocab_size), context_(context) {
  if (vocab_size < 2 || context < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "toy policy needs vocab >= 2 and context >= 1");
  }
  num_states_ = 1;
  for (int i = 0; i < context; ++i) num_states_ *= (vocab_size + 1);
  logits_.assign(static_cast<std::size_t>(num_states_) * vocab_, 0.0);
  values_.assign(num_states_, 0.0);
}

int ToyPolicy::NextState(int state, int action) const {
  return (state * (vocab_ + 1) + action + 1) % num_states_;
}

std::vector<double> ToyPolicy::Probs(int state) const {
  std::vector<double> p(vocab_);
  double max_logit = logit(state, 0);
  for (int a = 1; a < vocab_; ++a) max_logit = std::max(max_logit, logit(state, a));
  double z = 0;
  for (int a = 0; a < vocab_; ++a) {
    p[a] = std::exp(logit(state, a) - max_logit);
    z += p[a];
  }
  for (double& x : p) x /= z;
  return p;
}

double ToyPolicy::LogProb(int state, int action) const {
  double max_logit = logit(state, 0);
  for (int a = 1; a < vocab_; ++a) max_logit = std::max(max_logit, logit(state, a));
  double z = 0;
  for (int a = 0; a < vocab_; ++a) z += std::exp(logit(state, a) - max_logit);
  return logit(state, action) - max_logit - std::log(z);
}

std::vector<double> ToyPolicy::Parameters() const {
  std::vector<double> p(logits_);
  p.insert(p.end(), values_.begin(), values_.end());
  return p;
}

void ToyPolicy::SetParameters(std::span<const double> params) {
  if (params.size() != num_parameters()) {
    throw Error(ErrorCode::kLengthMismatch, "parameter vector size mismatch");
  }
  std::copy(params.begin(), params.begin() + logits_.size(), logits_.begin());
  std::copy(params.begin() + logits_.size(), params.end(), values_.begin());
}

std::string ToyPolicy::ToJson() const {
  nlohmann::ordered_json j;
  j["vocab_size"] = vocab_;
  j["context"] = context_;
  j["logits"] = logits_;
  j["values"] = values_;
  return j.dump();
}

ToyPolicy ToyPolicy::FromJson(const std::string& text) {
  try {
    auto j = nlohmann::json::parse(text);
    ToyPolicy p(j.at("vocab_size").get<int>(), j.at("context").get<int>());
    auto logits = j.at("logits").get<std::vector<double>>();
    auto values = j.at("values").get<std::vector<double>>();
    logits.insert(logits.end(), values.begin(), values.end());
    p.SetParameters(logits);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kProtocol, std::string("bad policy dump: ") + e.what());
  }
}

void Episode::Validate() const {
  const std::size_t n = actions.size();
  if (n == 0) throw Error(ErrorCode::kEmptyInput, "empty episode");
  if (states.size() != n || logp_old.size() != n || logp_ref.size() != n ||
      values.size() != n || rewards.size() != n || terminal.size() != n) {
    throw Error(ErrorCode::kLengthMismatch, "episode arrays differ in length");
  }
  if (std::count(terminal.begin(), terminal.end(), true) != 1 ||
      !terminal.back()) {
    throw Error(ErrorCode::kInvalidArgument,
                "episode must be terminal exactly at its last step");
  }
}

Episode SampleEpisode(const ToyPolicy& policy, const ToyPolicy& reference,
                      int eos_action, int max_steps, std::mt19937_64& rng) {
  Episode ep;
  int state = policy.initial_state();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < max_steps; ++t) {
    const auto probs = policy.Probs(state);
    const double u = unit(rng);
    int action = policy.vocab_size() - 1;
    double acc = 0;
    for (int a = 0; a < policy.vocab_size(); ++a) {
      acc += probs[a];
      if (u < acc) {
        action = a;
        break;
      }
    }
    ep.states.push_back(state);
    ep.actions.push_back(action);
    ep.logp_old.push_back(policy.LogProb(state, action));
    ep.logp_ref.push_back(reference.LogProb(state, action));
    ep.values.push_back(policy.Value(state));
    ep.rewards.push_back(0.0);
    ep.terminal.push_back(false);
    state = policy.NextState(state, action);
    if (action == eos_action) break;
  }
  ep.terminal.back() = true;
  return ep;
}

GaeResult BatchAdvantages(const TrajectoryBatch& batch,
                          const PpoConfig& config) {
  GaeResult all;
  for (const auto& ep : batch.episodes) {
    ep.Validate();
    auto g = ComputeGae(ep.rewards, ep.values, config.gamma, config.lambda);
    all.advantages.insert(all.advantages.end(), g.advantages.begin(),
                          g.advantages.end());
    all.returns.insert(all.returns.end(), g.returns.begin(), g.returns.end());
  }
  if (config.whiten_advantages && all.advantages.size() > 1) {
    const double n = static_cast<double>(all.advantages.size());
    const double mean =
        std::accumulate(all.advantages.begin(), all.advantages.end(), 0.0) / n;
    double var = 0;
    for (double a : all.advantages) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / n) + 1e-8;
    for (double& a : all.advantages) a = (a - mean) / sd;
  }
  return all;
}

ObjectiveEval EvaluateObjective(const ToyPolicy& policy,
                                const TrajectoryBatch& batch,
                                const GaeResult& targets,
                                const PpoConfig& config) {
  std::vector<double> logp_new, logp_old, v_new, v_old;
  std::vector<int> states, actions;
  for (const auto& ep : batch.episodes) {
    for (std::size_t t = 0; t < ep.size(); ++t) {
      states.push_back(ep.states[t]);
      actions.push_back(ep.actions[t]);
      logp_new.push_back(policy.LogProb(ep.states[t], ep.actions[t]));
      logp_old.push_back(ep.logp_old[t]);
      v_new.push_back(policy.Value(ep.states[t]));
      v_old.push_back(ep.values[t]);
    }
  }
  if (targets.advantages.size() != states.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "advantage targets do not match the batch");
  }
  const auto pl =
      PolicyLoss(logp_new, logp_old, targets.advantages, config.clip_range);
  const auto vl =
      ValueLoss(v_new, v_old, targets.returns, config.value_clip_range);

  ObjectiveEval out;
  out.policy_loss = pl.loss;
  out.value_loss = vl.loss;
  out.total = pl.loss + config.vf_coef * vl.loss;
  out.grad.assign(policy.num_parameters(), 0.0);
  const int V = policy.vocab_size();
  const std::size_t value_offset =
      static_cast<std::size_t>(policy.num_states()) * V;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const int s = states[i];
    if (pl.grad[i] != 0) {
      // d log pi(a|s) / d logit(s, b) = [a == b] - pi(b|s)
      const auto probs = policy.Probs(s);
      for (int b = 0; b < V; ++b) {
        out.grad[s * V + b] +=
            pl.grad[i] * ((b == actions[i] ? 1.0 : 0.0) - probs[b]);
      }
    }
    out.grad[value_offset + s] += config.vf_coef * vl.grad[i];
  }
  return out;
}

void AdamOptimizer::Step(std::vector<double>& params,
                         std::span<const double> grad) {
  if (m_.size() != params.size()) {
    m_.assign(params.size(), 0.0);
    v_.assign(params.size(), 0.0);
    step_ = 0;
  }
  ++step_;
  const double b1 = config_.adam_beta1, b2 = config_.adam_beta2;
  const double c1 = 1 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = b1 * m_[i] + (1 - b1) * grad[i];
    v_[i] = b2 * v_[i] + (1 - b2) * grad[i] * grad[i];
    const double update =
        (m_[i] / c1) / (std::sqrt(v_[i] / c2) + config_.adam_eps);
    params[i] -= config_.learning_rate *
                 (update + config_.weight_decay * params[i]);
  }
}

UpdateStats PpoUpdate(ToyPolicy& policy, const TrajectoryBatch& batch,
                      const PpoConfig& config, AdamOptimizer& optimizer) {
  config.Validate();
  const GaeResult targets = BatchAdvantages(batch, config);
  // Token offsets of each episode in the flattened targets.
  std::vector<std::size_t> offsets{0};
  for (const auto& ep : batch.episodes) {
    offsets.push_back(offsets.back() + ep.size());
  }
  const std::size_t n_ep = batch.episodes.size();
  const std::size_t mb = config.minibatch_episodes > 0
                             ? static_cast<std::size_t>(config.minibatch_episodes)
                             : std::max<std::size_t>(n_ep, 1);
  UpdateStats stats;
  for (int epoch = 0; epoch < config.ppo_epochs; ++epoch) {
    for (std::size_t start = 0; start < n_ep; start += mb) {
      const std::size_t stop = std::min(n_ep, start + mb);
      TrajectoryBatch slice;
      slice.episodes.assign(batch.episodes.begin() + start,
                            batch.episodes.begin() + stop);
      GaeResult part;
      part.advantages.assign(targets.advantages.begin() + offsets[start],
                             targets.advantages.begin() + offsets[stop]);
      part.returns.assign(targets.returns.begin() + offsets[start],
                          targets.returns.begin() + offsets[stop]);
      ObjectiveEval eval;
      try {
        eval = EvaluateObjective(policy, slice, part, config);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNonFinite) throw;
        throw Error(ErrorCode::kDivergence, std::string(e.what()) + " at epoch " +
                                                std::to_string(epoch));
      }
      if (!std::isfinite(eval.total)) {
        throw Error(ErrorCode::kDivergence,
                    "non-finite PPO loss at epoch " + std::to_string(epoch));
      }
      auto params = policy.Parameters();
      optimizer.Step(params, eval.grad);
      for (double p : params) {
        if (!std::isfinite(p)) {
          throw Error(ErrorCode::kDivergence,
                      "non-finite parameter at epoch " + std::to_string(epoch));
        }
      }
      policy.SetParameters(params);
      stats.total_loss.push_back(eval.total);
      stats.policy_loss.push_back(eval.policy_loss);
      stats.value_loss.push_back(eval.value_loss);
    }
  }
  return stats;
}

}  // namespace halloc
