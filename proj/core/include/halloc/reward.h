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

// Fine-grained per-token reward:
//
//   r_t = clip( alpha * (p_obj + p_att + p_rel)(a_t)
//             + (1 - alpha) * r_rec * [t == T-1]
//             - beta * (log P_policy(a_t) - log P_ref(a_t)),  +-reward_clip )

#ifndef HALLOC_REWARD_H_
#define HALLOC_REWARD_H_

#include <span>
#include <vector>

#include "halloc/detection.h"

namespace halloc {

struct RewardConfig {
  double alpha = 0.8;
  double beta = 0.001;
  double reward_clip = 10.0;
  int max_length = 256;

  void Validate() const;
};

// Weighted contribution of each term to r[t]; r[t] = clip(sum).
struct RewardComponents {
  double obj = 0;
  double att = 0;
  double rel = 0;
  double rec = 0;
  double kl = 0;

  double Sum() const { return obj + att + rel + rec + kl; }
};

struct RewardVector {
  std::vector<double> r;
  std::vector<RewardComponents> components;
  int terminal_index = 0;  // T - 1
};

// log P_policy - log P_ref; throws kNonFinite on NaN/inf inputs.
double KlTerm(double logp_policy, double logp_ref);

// Penalty records may target any token below T = logp_policy.size(); the
// terminal token T-1 receives the reconstruction reward.
RewardVector AssembleRewards(const DetectionReport& report,
                             std::span<const double> logp_policy,
                             std::span<const double> logp_ref,
                             const RewardConfig& config = {});

}  // namespace halloc

#endif  // HALLOC_REWARD_H_
