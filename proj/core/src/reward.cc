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

#include "halloc/reward.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "halloc/error.h"

namespace halloc {

void RewardConfig::Validate() const {
  if (!(alpha >= 0 && alpha <= 1)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in [0, 1]");
  }
  if (!(beta >= 0)) throw Error(ErrorCode::kInvalidArgument, "beta must be >= 0");
  if (!(reward_clip > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "reward_clip must be > 0");
  }
  if (max_length < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_length must be >= 1");
  }
}

double KlTerm(double logp_policy, double logp_ref) {
  if (!std::isfinite(logp_policy) || !std::isfinite(logp_ref)) {
    throw Error(ErrorCode::kNonFinite, "non-finite log-probability");
  }
  return logp_policy - logp_ref;
}

RewardVector AssembleRewards(const DetectionReport& report,
                             std::span<const double> logp_policy,
                             std::span<const double> logp_ref,
                             const RewardConfig& config) {
  config.Validate();
  if (logp_policy.size() != logp_ref.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "logp_policy has " + std::to_string(logp_policy.size()) +
                    " entries, logp_ref " + std::to_string(logp_ref.size()));
  }
  const int T = static_cast<int>(logp_policy.size());
  if (T == 0) throw Error(ErrorCode::kEmptyInput, "empty sequence");
  if (T > config.max_length) {
    throw Error(ErrorCode::kOutOfRange,
                "sequence length " + std::to_string(T) + " exceeds T_max " +
                    std::to_string(config.max_length));
  }
  RewardVector out;
  out.terminal_index = T - 1;
  out.components.resize(T);
  for (const auto& rec : report.penalties) {
    if (rec.token < 0 || rec.token >= T) {
      throw Error(ErrorCode::kOutOfRange,
                  std::string(PenaltyKindName(rec.kind)) +
                      " penalty record on token " + std::to_string(rec.token) +
                      " is outside a sequence of length " + std::to_string(T));
    }
    auto& c = out.components[rec.token];
    const double weighted = config.alpha * rec.value;
    switch (rec.kind) {
      case PenaltyKind::kObject: c.obj += weighted; break;
      case PenaltyKind::kAttribute: c.att += weighted; break;
      case PenaltyKind::kRelation: c.rel += weighted; break;
    }
  }
  out.components[T - 1].rec = (1 - config.alpha) * report.r_rec;
  out.r.resize(T);
  for (int t = 0; t < T; ++t) {
    auto& c = out.components[t];
    c.kl = -config.beta * KlTerm(logp_policy[t], logp_ref[t]);
    out.r[t] = std::clamp(c.Sum(), -config.reward_clip, config.reward_clip);
  }
  return out;
}

}  // namespace halloc
