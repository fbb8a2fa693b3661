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

// Deterministic step-helpfulness judge for the process-reward baseline.

#ifndef MRL_PROCESS_REWARD_HPP_
#define MRL_PROCESS_REWARD_HPP_

#include <vector>

#include "mrl/synth_env.hpp"

namespace mrl {

inline constexpr double kProcessRewardWeight = 0.3;

// score(t) = 1 when step t strictly shortens the distance to the goal, else
// 0. A step out of an unreachable-goal state that reaches a solvable one
// counts as progress.
std::vector<double> process_stub_reward(const Trajectory& trajectory, const Environment& env);

}  // namespace mrl

#endif  // MRL_PROCESS_REWARD_HPP_
