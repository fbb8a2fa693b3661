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

// Experiment orchestration across reward modes and seeds, and the report
// tables built from metrics files.

#ifndef MRL_HARNESS_HPP_
#define MRL_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mrl/remote_provider.hpp"
#include "mrl/reward.hpp"
#include "mrl/synth_env.hpp"
#include "mrl/trainer.hpp"

namespace mrl {

struct ExperimentManifest {
  // Either a saved environment file or a generated suite.
  std::optional<std::filesystem::path> env_file;
  SuiteConfig suite;
  std::vector<RewardMode> modes;
  std::vector<std::uint64_t> seeds;
  TrainConfig train;
  RewardConfig reward;
  std::filesystem::path out_dir;
  // Remote abstraction endpoint; the reference provider when absent.
  std::optional<EndpointConfig> endpoint;
  nlohmann::json source;  // the manifest as given

  // Throws ConfigError: no modes or seeds, duplicate seeds, missing env file,
  // empty output directory.
  void validate() const;
};

// Relative paths resolve against `base_dir`. Throws ConfigError.
ExperimentManifest parse_manifest(const nlohmann::json& j, const std::filesystem::path& base_dir);
ExperimentManifest load_manifest(const std::filesystem::path& path);

struct RunRecord {
  RewardMode mode = RewardMode::kAdmire;
  std::uint64_t seed = 0;
  std::filesystem::path metrics_path;
  std::optional<std::string> error;
  std::optional<EvalSummary> final_eval;
};

struct ModeSummary {
  int runs = 0;           // runs with a final evaluation
  int failed_runs = 0;
  double mean_success = 0.0;
  std::map<std::string, double> mean_by_tier;
};

struct ExperimentBundle {
  std::vector<RunRecord> runs;
  std::map<std::string, ModeSummary> summary;  // keyed by mode name
  // Per tier: mean(admire) - mean(outcome), when both modes ran.
  std::map<std::string, double> admire_minus_outcome;
};

// Writes <out>/manifest.json, <out>/env.json, <out>/metrics/<mode>_seed<S>.jsonl
// and <out>/summary.json. A failing run is recorded and the others proceed.
ExperimentBundle run_experiment(const ExperimentManifest& manifest);

nlohmann::json to_json(const ExperimentBundle& bundle);

// Mean over the given runs' final evaluations, by mode.
std::map<std::string, ModeSummary> summarize_runs(const std::vector<RunRecord>& runs);

struct RunSeries {
  std::string mode;
  std::uint64_t seed = 0;
  std::vector<MetricsRow> rows;
};

struct ReportTables {
  // (a) One row per run and tier: initial and final evaluation success.
  struct TierRow {
    std::string mode;
    std::uint64_t seed = 0;
    std::string tier;  // "overall" or a tier name
    double initial = 0.0;
    double final = 0.0;
  };
  std::vector<TierRow> tiers;
  std::map<std::string, std::map<std::string, double>> mean_final;  // mode -> tier -> mean
  std::map<std::string, double> admire_minus_outcome;               // tier -> delta
  // (c) Initialization rate per run, and whether it never decreases.
  std::map<std::string, std::vector<double>> init_rate;  // "<mode>_seed<S>" -> series
  std::map<std::string, bool> init_rate_nondecreasing;
  // (d) Mean per-iteration phase wall times by mode.
  std::map<std::string, PhaseTimes> mean_wall;
  std::optional<double> reward_phase_ratio;  // admire / outcome
  // (b) Hit counts per run and task: iteration -> counts per milestone index.
  std::map<std::string, std::map<std::string, std::map<int, std::vector<int>>>> hit_series;
};

// Throws PreconditionError for an empty input and ParseError for bad rows.
ReportTables build_report(const std::vector<RunSeries>& runs);
std::vector<RunSeries> load_runs(const std::vector<std::filesystem::path>& metrics_files);

// Writes tier_success.csv, tier_delta.csv, init_rate.csv, wall_times.csv,
// hit_counts/<run>_<task>.csv and summary.txt under `out_dir`.
void write_report(const ReportTables& tables, const std::filesystem::path& out_dir);

}  // namespace mrl

#endif  // MRL_HARNESS_HPP_
