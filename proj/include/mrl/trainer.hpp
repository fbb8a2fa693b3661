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

// Outer training loop. Each iteration samples tasks, rolls out a group per
// task under a frozen policy snapshot, updates milestone memory from the
// group's best success (admire mode), assigns step rewards and group
// advantages, then runs minibatched clipped-surrogate ascent.

#ifndef MRL_TRAINER_HPP_
#define MRL_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mrl/grpo.hpp"
#include "mrl/metrics.hpp"
#include "mrl/milestone_memory.hpp"
#include "mrl/reward.hpp"
#include "mrl/synth_env.hpp"

namespace mrl {

enum class RewardMode { kAdmire, kOutcomeOnly, kProcessStub };

// "admire", "outcome", "process".
std::string_view reward_mode_name(RewardMode mode);
// Also accepts "outcome_only" and "process_stub". Throws ConfigError.
RewardMode parse_reward_mode(std::string_view text);

struct TrainConfig {
  int group_size = 8;
  int tasks_per_iteration = 4;
  int max_steps = 20;  // caps each task's horizon
  double clip_epsilon = 0.2;
  double learning_rate = 1.0;
  int update_epochs = 2;
  int minibatch_size = 128;
  int iterations = 300;
  std::uint64_t seed = 1;
  double temperature = 1.0;
  int eval_rollouts = 32;  // per task, before and after training; 0 skips
  int workers = 0;         // rollout threads; 0 picks hardware concurrency

  // Throws ConfigError.
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);
// Missing fields keep their defaults.
TrainConfig train_config_from_json(const nlohmann::json& j);

// Everything the update phase of one iteration consumed.
struct IterationTrace {
  int iteration = 0;
  std::vector<Trajectory> trajectories;  // task-major, group_size per task
  std::vector<std::vector<StepRewardRecord>> rewards;
  std::vector<std::vector<double>> advantages;
};

struct TrainHooks {
  // Called after each iteration's update with the post-update policy.
  std::function<void(const IterationTrace&, const TabularPolicy&)> on_iteration;
};

struct TrainResult {
  std::vector<MetricsRow> history;
  TabularPolicy policy;
  bool completed = false;
  std::optional<std::string> error;
};

// Success rates from `rollouts_per_task` sampled episodes per task.
EvalSummary evaluate(const Environment& env, const RolloutPolicy& policy, int rollouts_per_task,
                     std::uint64_t seed, int max_steps, int workers = 1);

// Errors during training stop the loop; the partial history is returned
// with `error` set on the result and on the last row.
TrainResult train(const Environment& env, MilestoneStore& store, AbstractionProvider& provider,
                  const RewardConfig& reward_config, const TrainConfig& train_config,
                  RewardMode mode, const TrainHooks& hooks = {});

}  // namespace mrl

#endif  // MRL_TRAINER_HPP_
