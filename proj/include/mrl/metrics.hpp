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

// Per-iteration training metrics and their JSONL form.

#ifndef MRL_METRICS_HPP_
#define MRL_METRICS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace mrl {

struct PhaseTimes {
  double rollout = 0.0;  // seconds
  double reward = 0.0;
  double update = 0.0;
};

// Success rates from a fixed batch of evaluation rollouts per task.
struct EvalSummary {
  double overall = 0.0;
  std::map<std::string, double> by_tier;  // "easy" / "medium" / "hard"
  std::map<std::string, double> by_task;
  int rollouts_per_task = 0;
};

struct MetricsRow {
  std::string mode;
  std::uint64_t seed = 0;
  int iteration = 0;  // 1-based
  double lambda = 0.0;
  std::vector<std::string> tasks;  // sampled this iteration
  // Over the training rollouts of this iteration.
  double success_rate = 0.0;
  std::map<std::string, double> success_by_tier;  // sampled tiers only
  // Fraction of suite instructions with a milestone set after this iteration.
  double milestone_initialization_rate = 0.0;
  // Per sampled task with milestones: entry j counts rollouts that hit
  // milestone j.
  std::map<std::string, std::vector<int>> hit_counts;
  std::map<std::string, int> milestone_versions;
  std::vector<std::string> milestone_updates;  // "key:kind:version"
  double mean_total_reward = 0.0;
  int degenerate_groups = 0;
  double objective = 0.0;  // surrogate at the end of the update phase
  PhaseTimes wall;
  std::optional<EvalSummary> initial_eval;  // first row only
  std::optional<EvalSummary> final_eval;    // last row only
  std::optional<std::string> error;         // set when the run halted here
};

nlohmann::json to_json(const EvalSummary& e);
EvalSummary eval_summary_from_json(const nlohmann::json& j);

// `with_wall_times` false omits the nondeterministic timing fields.
nlohmann::json to_json(const MetricsRow& row, bool with_wall_times = true);
MetricsRow metrics_row_from_json(const nlohmann::json& j);

void write_metrics(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);
// Throws ParseError (with line number) on malformed rows.
std::vector<MetricsRow> read_metrics(const std::filesystem::path& path);

}  // namespace mrl

#endif  // MRL_METRICS_HPP_
