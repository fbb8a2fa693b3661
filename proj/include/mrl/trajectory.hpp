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

#ifndef MRL_TRAJECTORY_HPP_
#define MRL_TRAJECTORY_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace mrl {

enum class Difficulty { kEasy, kMedium, kHard };

std::string_view difficulty_name(Difficulty d);
Difficulty parse_difficulty(std::string_view name);  // throws ParseError

struct Instruction {
  std::string key;
  std::string goal_text;
  Difficulty difficulty = Difficulty::kEasy;

  bool operator==(const Instruction&) const = default;
};

using FeatureValue = std::variant<double, std::string>;

// Structured stand-in for a screenshot: the screen identifier plus whatever
// scalar/string features the simulator renders for it.
struct Observation {
  std::string screen_id;
  std::map<std::string, FeatureValue> features;

  bool operator==(const Observation&) const = default;
};

struct ActionRecord {
  std::string raw_text;
  // Normalized natural-language description; what milestone matching sees.
  std::string description;
  bool syntax_valid = false;

  bool operator==(const ActionRecord&) const = default;
};

struct Step {
  int index = 0;
  Observation observation;  // observation the action was taken from
  ActionRecord action;

  bool operator==(const Step&) const = default;
};

struct Trajectory {
  std::string instruction_key;
  std::vector<Step> steps;
  int outcome = 0;

  int terminal_step() const { return static_cast<int>(steps.size()); }
  std::vector<std::string> action_descriptions() const;

  bool operator==(const Trajectory&) const = default;
};

// Checks structural invariants: nonempty steps, contiguous indices from 0,
// outcome in {0,1}, descriptions present on valid actions. Throws ParseError.
void validate(const Trajectory& trajectory);

// Success predicate over a finished trajectory. Implemented by the simulator.
class SuccessChecker {
 public:
  virtual ~SuccessChecker() = default;
  // Throws LookupError when the trajectory's instruction is unknown.
  virtual bool accepts(const Trajectory& trajectory) const = 0;
};

// Evaluates the checker and stores the result into trajectory.outcome.
int outcome_score(Trajectory& trajectory, const SuccessChecker& checker);

// -1 for syntactically invalid actions, 0 otherwise.
inline double format_reward(const ActionRecord& action) {
  return action.syntax_valid ? 0.0 : -1.0;
}

// ---- trajectory log (JSON lines) -------------------------------------------

inline constexpr int kTrajectorySchemaVersion = 1;

nlohmann::json to_json(const Trajectory& trajectory);
// Throws ParseError on schema violations, VersionError on version mismatch.
Trajectory trajectory_from_json(const nlohmann::json& j);

void write_trajectory_log(const std::vector<Trajectory>& trajectories,
                          const std::filesystem::path& path);
void append_trajectory_log(const std::vector<Trajectory>& trajectories,
                           const std::filesystem::path& path);
// Blank lines are skipped. Errors name the offending 1-based line number.
std::vector<Trajectory> read_trajectory_log(const std::filesystem::path& path);

}  // namespace mrl

#endif  // MRL_TRAJECTORY_HPP_
