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

// Step-level group-relative policy optimization over a tabular softmax
// policy.
//
// Advantages are normalized over every step of every trajectory in one
// instruction group (population std). The objective averages the clipped
// surrogate min(r*A, clip(r, 1-eps, 1+eps)*A) over all steps in the batch,
// where r is the new/old probability ratio of the taken action.

#ifndef MRL_GRPO_HPP_
#define MRL_GRPO_HPP_

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mrl/reward.hpp"
#include "mrl/synth_env.hpp"

namespace mrl {

// Softmax policy with one logit vector per (screen, instruction) pair. The
// vector length equals the screen's menu size.
class TabularPolicy : public RolloutPolicy {
 public:
  using Table = std::map<std::string, std::vector<double>, std::less<>>;

  explicit TabularPolicy(double temperature = 1.0);

  // Zero logits for every screen reachable from each task's start.
  static TabularPolicy for_environment(const Environment& env, double temperature = 1.0);

  static std::string key(std::string_view screen, std::string_view instruction);

  // Throws LookupError for a missing entry.
  std::span<double> logits(std::string_view screen, std::string_view instruction);
  std::span<const double> logits(std::string_view screen, std::string_view instruction) const;
  std::span<double> logits_by_key(std::string_view key);
  std::span<const double> logits_by_key(std::string_view key) const;

  void set_entry(std::string_view screen, std::string_view instruction, std::vector<double> logits);

  // Softmax of logits / temperature; sums to 1.
  std::vector<double> probabilities(std::string_view key) const;
  double log_prob(std::string_view key, std::size_t action) const;

  std::size_t choose(const Observation& observation, const TaskSpec& task,
                     std::span<const ActionRecord> menu, Rng& rng) const override;

  double temperature() const { return temperature_; }
  const Table& table() const { return table_; }
  Table& mutable_table() { return table_; }

  nlohmann::json to_json() const;
  static TabularPolicy from_json(const nlohmann::json& j);

  bool operator==(const TabularPolicy& other) const {
    return temperature_ == other.temperature_ && table_ == other.table_;
  }

 private:
  double temperature_;
  Table table_;
};

// Softmax with the max subtracted; writes into `out`.
void softmax(std::span<const double> logits, double temperature, std::span<double> out);

struct AdvantageBatch {
  std::vector<std::vector<double>> advantages;  // [trajectory][step]
  double mean = 0.0;
  double std = 0.0;
  bool degenerate = false;
};

inline constexpr double kDegenerateStd = 1e-8;

// Pools every step total of the group. Throws PreconditionError for an empty
// group, mismatched reward lengths, or mixed instruction keys.
AdvantageBatch normalize_advantages(std::span<const Trajectory> group,
                                    std::span<const std::vector<StepRewardRecord>> rewards);

double clipped_term(double ratio, double advantage, double epsilon);

// One optimization sample: a taken action at a (screen, instruction) state.
struct PolicySample {
  std::string key;  // TabularPolicy::key(screen, instruction)
  std::size_t action = 0;
  double advantage = 0.0;
};

struct SurrogateResult {
  double objective = 0.0;
  // Same keys/shapes as the policy table, only for touched entries.
  TabularPolicy::Table gradient;
};

// Mean clipped surrogate over `samples` and its exact gradient with respect
// to `policy`'s logits. Where the clipped branch is strictly smaller, the
// sample contributes no gradient. Throws LookupError for actions the policy
// does not know.
SurrogateResult surrogate_and_gradient(const TabularPolicy& policy, const TabularPolicy& old_policy,
                                       std::span<const PolicySample> samples, double epsilon);

// Builds optimization samples for a trajectory; actions are located in the
// environment menu of each step's screen.
std::vector<PolicySample> make_samples(const Environment& env, const Trajectory& trajectory,
                                       std::span<const double> advantages);

}  // namespace mrl

#endif  // MRL_GRPO_HPP_
