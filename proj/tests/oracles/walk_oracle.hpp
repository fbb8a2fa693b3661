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

// Exact success probability of a uniformly random policy, by dynamic
// programming over (latent state, steps left).

#ifndef MRL_TESTS_WALK_ORACLE_HPP_
#define MRL_TESTS_WALK_ORACLE_HPP_

#include <map>
#include <utility>

#include "mrl/synth_env.hpp"

namespace oracle {

class UniformSuccess {
 public:
  UniformSuccess(const mrl::Environment& env, const mrl::TaskSpec& task) : env_(env), task_(task) {}

  double probability(int horizon) { return solve(env_.initial_state(task_), horizon); }

 private:
  double solve(const mrl::LatentState& s, int left) {
    if (env_.goal_reached(task_, s)) return 1.0;
    if (left == 0) return 0.0;
    auto key = std::make_pair(s, left);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const auto menu = env_.screen(s.screen).menu;
    double p = 0.0;
    for (const std::string& raw : menu) p += solve(env_.step(s, raw).state, left - 1);
    p /= static_cast<double>(menu.size());
    memo_.emplace(key, p);
    return p;
  }

  const mrl::Environment& env_;
  const mrl::TaskSpec& task_;
  std::map<std::pair<mrl::LatentState, int>, double> memo_;
};

}  // namespace oracle

#endif  // MRL_TESTS_WALK_ORACLE_HPP_
