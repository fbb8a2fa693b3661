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

#include "mrl/process_reward.hpp"

namespace mrl {

std::vector<double> process_stub_reward(const Trajectory& trajectory, const Environment& env) {
  const TaskSpec& task = env.task(trajectory.instruction_key);
  const std::vector<LatentState> states = env.replay(trajectory);
  std::vector<double> scores(trajectory.steps.size(), 0.0);
  std::optional<int> before = env.distance_to_goal(task, states.front());
  for (std::size_t t = 0; t < trajectory.steps.size(); ++t) {
    const std::optional<int> after = env.distance_to_goal(task, states[t + 1]);
    if (after && (!before || *after < *before)) scores[t] = 1.0;
    before = after;
  }
  return scores;
}

}  // namespace mrl
