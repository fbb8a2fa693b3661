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

// SynthNav: a deterministic, fully observable-by-construction GUI navigation
// simulator. Screens are nodes, actions are grammar-checked strings, and
// edges carry latent "fact" deltas (field filled, switch toggled, ...). A
// task asks for a set of facts; its shortest solution length determines the
// difficulty tier.

#ifndef MRL_SYNTH_ENV_HPP_
#define MRL_SYNTH_ENV_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mrl/action_grammar.hpp"
#include "mrl/rng.hpp"
#include "mrl/trajectory.hpp"

namespace mrl {

struct FactDelta {
  std::vector<std::string> add;
  std::vector<std::string> remove;

  bool operator==(const FactDelta&) const = default;
};

struct Edge {
  std::string to;
  FactDelta delta;

  bool operator==(const Edge&) const = default;
};

struct Screen {
  std::string id;
  // Raw action strings the interface offers on this screen, in display
  // order. Includes no-ops and malformed variants; a policy picks among them.
  std::vector<std::string> menu;
  std::map<std::string, FeatureValue> features;

  bool operator==(const Screen&) const = default;
};

struct LatentState {
  std::string screen;
  std::set<std::string> facts;

  auto operator<=>(const LatentState&) const = default;
  bool operator==(const LatentState&) const = default;
};

struct TaskSpec {
  Instruction instruction;
  std::string start_screen;
  std::vector<std::string> goal_facts;  // goal predicate: all present
  int horizon = 20;
  int shortest_length = 0;
  // Canonical actions of the fact-adding steps on the intended path, in
  // order. Ground truth for the reference abstractor and for tests only.
  std::vector<std::string> transition_steps;
  // Task-specific slot values (names, entries...) appearing in actions.
  std::vector<std::string> parameters;

  bool operator==(const TaskSpec&) const = default;
};

class Environment : public SuccessChecker {
 public:
  using EdgeTable = std::map<std::string, std::map<std::string, Edge>>;

  Environment(std::map<std::string, Screen> screens, EdgeTable edges,
              std::vector<TaskSpec> tasks, ActionGrammar grammar);

  const ActionGrammar& grammar() const { return grammar_; }
  const std::vector<TaskSpec>& tasks() const { return tasks_; }
  const std::map<std::string, Screen>& screens() const { return screens_; }
  const EdgeTable& edges() const { return edges_; }

  // Throws LookupError for unknown keys / ids.
  const TaskSpec& task(std::string_view key) const;
  const Screen& screen(std::string_view id) const;
  std::span<const ActionRecord> menu(std::string_view screen_id) const;

  LatentState initial_state(const TaskSpec& task) const;
  bool goal_reached(const TaskSpec& task, const LatentState& state) const;
  Observation observe(const LatentState& state) const;

  struct StepResult {
    LatentState state;
    Observation observation;
  };
  // Unparseable or unmatched actions leave the state unchanged.
  StepResult step(const LatentState& state, const ActionRecord& action) const;
  StepResult step(const LatentState& state, std::string_view raw) const;

  // Replays the trajectory's raw actions from its task's start state. The
  // result has terminal_step()+1 states: before each step, then final.
  std::vector<LatentState> replay(const Trajectory& trajectory) const;

  // Success checker: replays from the task start and tests the goal.
  bool accepts(const Trajectory& trajectory) const override;

  // Per step: true iff the step added a fact that survives to the end of the
  // trajectory (a key state transition).
  std::vector<bool> transition_labels(const Trajectory& trajectory) const;

  // Fewest actions from `state` to any goal state; nullopt if unreachable.
  std::optional<int> distance_to_goal(const TaskSpec& task,
                                      const LatentState& state) const;
  // Breadth-first shortest successful action sequence from the start state.
  std::optional<std::vector<std::string>> shortest_solution(
      const TaskSpec& task) const;

  nlohmann::json to_json() const;
  static Environment from_json(const nlohmann::json& j);

  bool operator==(const Environment& other) const {
    return screens_ == other.screens_ && edges_ == other.edges_ &&
           tasks_ == other.tasks_ && grammar_ == other.grammar_;
  }

 private:
  void validate() const;
  void index_tasks();
  std::vector<std::pair<std::string, LatentState>> successors(
      const LatentState& state) const;

  std::map<std::string, Screen> screens_;
  EdgeTable edges_;
  std::vector<TaskSpec> tasks_;
  ActionGrammar grammar_;
  std::map<std::string, std::vector<ActionRecord>, std::less<>> menus_;
  std::map<std::string, std::size_t, std::less<>> task_index_;
  // Per task: distance to goal for every state reachable from its start.
  std::vector<std::map<LatentState, int>> distance_tables_;
};

inline constexpr int kEnvSchemaVersion = 1;

// ---- suite generation -------------------------------------------------------

struct TierBand {
  int min_length;
  int max_length;  // inclusive
};

struct SuiteConfig {
  std::uint64_t seed = 7;
  int easy = 4;
  int medium = 4;
  int hard = 4;
  int horizon = 20;
  // Shortest-solution length bands the generator samples from. Tier rules
  // are easy <= 5, medium 6..10, hard >= 11; these must sit inside them.
  TierBand easy_band{3, 5};
  TierBand medium_band{6, 8};
  TierBand hard_band{11, 12};
  double fact_step_fraction = 0.6;
  double back_edge_prob = 0.25;
  double detour_prob = 0.35;
  double alt_route_prob = 0.5;  // per task: one longer optional route
  int decoys_per_screen = 0;
};

// Parses "easy:4,medium:4,hard:4" (any subset, any order) into the counts of
// `base`. Throws ParseError.
SuiteConfig parse_suite(std::string_view text, SuiteConfig base = {});

// Throws GenerationError when a requested tier cannot fit in the horizon or
// the bands violate the tier rules.
Environment generate_suite(const SuiteConfig& config);

// Difficulty implied by a shortest-solution length.
Difficulty tier_for_length(int length);

// ---- rollouts ---------------------------------------------------------------

class RolloutPolicy {
 public:
  virtual ~RolloutPolicy() = default;
  // Picks an index into `menu`.
  virtual std::size_t choose(const Observation& observation,
                             const TaskSpec& task,
                             std::span<const ActionRecord> menu,
                             Rng& rng) const = 0;
};

class UniformPolicy : public RolloutPolicy {
 public:
  std::size_t choose(const Observation&, const TaskSpec&,
                     std::span<const ActionRecord> menu, Rng& rng) const override {
    return rng.below(menu.size());
  }
};

// Runs until the goal holds or the horizon is reached; sets the outcome via
// outcome_score unless `score` is false (outcome left at 0).
Trajectory rollout(const Environment& env, const RolloutPolicy& policy,
                   const TaskSpec& task, std::uint64_t seed, bool score = true);

}  // namespace mrl

#endif  // MRL_SYNTH_ENV_HPP_
