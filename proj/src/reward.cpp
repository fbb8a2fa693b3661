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

#include "mrl/reward.hpp"

#include <cmath>

#include "mrl/error.hpp"

namespace mrl {

using nlohmann::json;

void RewardConfig::validate() const {
  if (!(lambda0 >= 0.0)) throw ConfigError("lambda0 must be >= 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0,1]");
  if (!(zeta >= 0.0)) throw ConfigError("zeta must be >= 0");
  if (!(eta >= 0.0)) throw ConfigError("eta must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
}

json to_json(const RewardConfig& c) {
  return {{"lambda0", c.lambda0}, {"gamma", c.gamma}, {"zeta", c.zeta},
          {"eta", c.eta},         {"delta", c.delta}, {"broadcast_outcome", c.broadcast_outcome}};
}

RewardConfig reward_config_from_json(const json& j) {
  RewardConfig c;
  try {
    c.lambda0 = j.value("lambda0", c.lambda0);
    c.gamma = j.value("gamma", c.gamma);
    c.zeta = j.value("zeta", c.zeta);
    c.eta = j.value("eta", c.eta);
    c.delta = j.value("delta", c.delta);
    c.broadcast_outcome = j.value("broadcast_outcome", c.broadcast_outcome);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad reward config: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<double> milestone_rewards_success(const MatchTrace& trace) {
  std::vector<double> out(trace.steps.size(), 0.0);
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    if (trace.steps[t].hit) out[t] = trace.steps[t].similarity;
  }
  return out;
}

std::vector<double> milestone_rewards_failure(const MatchTrace& trace, double zeta) {
  if (trace.K <= 0) throw PreconditionError("failure scaffolding needs K >= 1");
  std::vector<double> out(trace.steps.size(), 0.0);
  const double K = static_cast<double>(trace.K);
  int k = 0;
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    const MatchStep& s = trace.steps[t];
    if (s.hit) ++k;
    out[t] = static_cast<double>(k) / K + (s.hit ? zeta * s.similarity : 0.0);
  }
  return out;
}

double curriculum_lambda(const RewardConfig& config, int epoch) {
  if (epoch < 1) throw ConfigError("epochs are 1-based; got " + std::to_string(epoch));
  return config.lambda0 * std::pow(config.gamma, epoch);
}

namespace {

std::vector<StepRewardRecord> assemble(const Trajectory& trajectory,
                                       const std::vector<double>& dense, double weight,
                                       const RewardConfig& config) {
  const std::size_t n = trajectory.steps.size();
  std::vector<StepRewardRecord> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    StepRewardRecord& r = out[t];
    r.t = static_cast<int>(t);
    const bool pays_outcome = config.broadcast_outcome || t + 1 == n;
    r.r_outcome = pays_outcome ? static_cast<double>(trajectory.outcome) : 0.0;
    r.r_format = format_reward(trajectory.steps[t].action);
    r.r_mil = dense[t];
    r.lambda_used = weight;
    r.r_total = r.r_outcome + config.eta * r.r_format + weight * r.r_mil;
  }
  return out;
}

}  // namespace

std::vector<StepRewardRecord> total_rewards(const Trajectory& trajectory,
                                            const std::optional<MatchTrace>& trace,
                                            const RewardConfig& config, int epoch) {
  config.validate();
  const double lambda = curriculum_lambda(config, epoch);
  std::vector<double> mil(trajectory.steps.size(), 0.0);
  if (trace && trace->K > 0) {
    if (trace->steps.size() != trajectory.steps.size()) {
      throw PreconditionError("match trace does not cover the trajectory");
    }
    mil = trajectory.outcome == 1 ? milestone_rewards_success(*trace)
                                  : milestone_rewards_failure(*trace, config.zeta);
  }
  return assemble(trajectory, mil, lambda, config);
}

std::vector<StepRewardRecord> total_rewards_with_dense(const Trajectory& trajectory,
                                                       const std::vector<double>& dense,
                                                       double weight, const RewardConfig& config) {
  config.validate();
  if (dense.size() != trajectory.steps.size()) {
    throw PreconditionError("dense reward does not cover the trajectory");
  }
  return assemble(trajectory, dense, weight, config);
}

}  // namespace mrl
