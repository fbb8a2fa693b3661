// Copyright 2026 The Milestone RL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Per-step reward assembly. Milestone credit is asymmetric in the outcome:
//
//   success: r_mil(t) = s_t if t is a milestone hit, else 0     (denoising)
//   failure: r_mil(t) = k_t / K + (hit ? zeta * s_t : 0)         (scaffolding)
//
// where k_t counts hits at steps <= t. The total is
//   r_total(t) = r_outcome(t) + eta * r_format(t) + lambda(E) * r_mil(t)
// with lambda(E) = lambda0 * gamma^E for 1-based epoch E.

#ifndef MRL_REWARD_HPP_
#define MRL_REWARD_HPP_

#include <optional>
#include <vector>

#include "json.hpp"
#include "mrl/matching.hpp"
#include "mrl/trajectory.hpp"

namespace mrl {

struct RewardConfig {
  double lambda0 = 0.3;
  double gamma = 0.99;
  double zeta = 0.5;
  double eta = 0.5;
  double delta = kDefaultMatchThreshold;
  // false pays the outcome only at the final step (ablation switch).
  bool broadcast_outcome = true;

  // Throws ConfigError.
  void validate() const;
};

nlohmann::json to_json(const RewardConfig& config);
// Missing fields keep their defaults.
RewardConfig reward_config_from_json(const nlohmann::json& j);

struct StepRewardRecord {
  int t = 0;
  double r_outcome = 0.0;
  double r_format = 0.0;
  double r_mil = 0.0;
  double r_total = 0.0;
  double lambda_used = 0.0;
};

std::vector<double> milestone_rewards_success(const MatchTrace& trace);
// Throws PreconditionError when trace.K == 0.
std::vector<double> milestone_rewards_failure(const MatchTrace& trace, double zeta);

// Throws ConfigError for epoch < 1.
double curriculum_lambda(const RewardConfig& config, int epoch);

// `trace` must be absent iff the instruction has no milestone set yet; an
// absent trace zeroes the milestone term.
std::vector<StepRewardRecord> total_rewards(const Trajectory& trajectory,
                                            const std::optional<MatchTrace>& trace,
                                            const RewardConfig& config, int epoch);

// Same assembly with a caller-supplied dense term and fixed weight; used by
// the process-reward baseline. `dense` must cover every step.
std::vector<StepRewardRecord> total_rewards_with_dense(const Trajectory& trajectory,
                                                       const std::vector<double>& dense,
                                                       double weight, const RewardConfig& config);

}  // namespace mrl

#endif  // MRL_REWARD_HPP_
