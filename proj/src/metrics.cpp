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

#include "mrl/metrics.hpp"

#include <fstream>

#include "mrl/error.hpp"

namespace mrl {

using nlohmann::json;

json to_json(const EvalSummary& e) {
  return {{"overall", e.overall},
          {"by_tier", e.by_tier},
          {"by_task", e.by_task},
          {"rollouts_per_task", e.rollouts_per_task}};
}

EvalSummary eval_summary_from_json(const json& j) {
  EvalSummary e;
  e.overall = j.at("overall").get<double>();
  e.by_tier = j.at("by_tier").get<std::map<std::string, double>>();
  e.by_task = j.value("by_task", std::map<std::string, double>{});
  e.rollouts_per_task = j.value("rollouts_per_task", 0);
  return e;
}

json to_json(const MetricsRow& row, bool with_wall_times) {
  json j = {{"mode", row.mode},
            {"seed", row.seed},
            {"iteration", row.iteration},
            {"lambda", row.lambda},
            {"tasks", row.tasks},
            {"success_rate", row.success_rate},
            {"success_by_tier", row.success_by_tier},
            {"milestone_initialization_rate", row.milestone_initialization_rate},
            {"hit_counts", row.hit_counts},
            {"milestone_versions", row.milestone_versions},
            {"milestone_updates", row.milestone_updates},
            {"mean_total_reward", row.mean_total_reward},
            {"degenerate_groups", row.degenerate_groups},
            {"objective", row.objective}};
  if (with_wall_times) {
    j["wall_time"] = {
        {"rollout", row.wall.rollout}, {"reward", row.wall.reward}, {"update", row.wall.update}};
  }
  if (row.initial_eval) j["initial_eval"] = to_json(*row.initial_eval);
  if (row.final_eval) j["final_eval"] = to_json(*row.final_eval);
  if (row.error) j["error"] = *row.error;
  return j;
}

MetricsRow metrics_row_from_json(const json& j) {
  MetricsRow row;
  row.mode = j.at("mode").get<std::string>();
  row.seed = j.at("seed").get<std::uint64_t>();
  row.iteration = j.at("iteration").get<int>();
  row.lambda = j.value("lambda", 0.0);
  row.tasks = j.value("tasks", std::vector<std::string>{});
  row.success_rate = j.at("success_rate").get<double>();
  row.success_by_tier = j.value("success_by_tier", std::map<std::string, double>{});
  row.milestone_initialization_rate = j.at("milestone_initialization_rate").get<double>();
  row.hit_counts = j.value("hit_counts", std::map<std::string, std::vector<int>>{});
  row.milestone_versions = j.value("milestone_versions", std::map<std::string, int>{});
  row.milestone_updates = j.value("milestone_updates", std::vector<std::string>{});
  row.mean_total_reward = j.value("mean_total_reward", 0.0);
  row.degenerate_groups = j.value("degenerate_groups", 0);
  row.objective = j.value("objective", 0.0);
  if (j.contains("wall_time")) {
    const json& w = j.at("wall_time");
    row.wall = {w.at("rollout").get<double>(), w.at("reward").get<double>(),
                w.at("update").get<double>()};
  }
  if (j.contains("initial_eval")) row.initial_eval = eval_summary_from_json(j.at("initial_eval"));
  if (j.contains("final_eval")) row.final_eval = eval_summary_from_json(j.at("final_eval"));
  if (j.contains("error")) row.error = j.at("error").get<std::string>();
  return row;
}

void write_metrics(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const MetricsRow& row : rows) out << to_json(row).dump() << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<MetricsRow> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<MetricsRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(metrics_row_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ": " + e.what(), line_no);
    }
  }
  return rows;
}

}  // namespace mrl
