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

// mrl: environment generation, training, offline scoring, threshold
// calibration, experiment runs and reports.
//
// Exit codes: 0 success, 1 validation error, 2 runtime error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mrl/embedding.hpp"
#include "mrl/error.hpp"
#include "mrl/harness.hpp"
#include "mrl/matching.hpp"
#include "mrl/metrics.hpp"
#include "mrl/milestone_memory.hpp"
#include "mrl/remote_provider.hpp"
#include "mrl/reward.hpp"
#include "mrl/synth_env.hpp"
#include "mrl/trainer.hpp"
#include "mrl/trajectory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw mrl::ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw mrl::ParseError(path.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw mrl::Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

struct EnvOptions {
  std::string env_file;
  std::uint64_t env_seed = mrl::SuiteConfig{}.seed;
  std::string suite = "easy:4,medium:4,hard:4";
};

void add_env_options(CLI::App* cmd, EnvOptions& o) {
  cmd->add_option("--env", o.env_file, "Environment JSON written by gen-env");
  cmd->add_option("--env-seed", o.env_seed, "Generator seed when no --env is given");
  cmd->add_option("--suite", o.suite, "Tier counts, e.g. easy:4,medium:4,hard:4");
}

mrl::Environment make_env(const EnvOptions& o) {
  if (!o.env_file.empty()) return mrl::Environment::from_json(read_json_file(o.env_file));
  mrl::SuiteConfig config = mrl::parse_suite(o.suite);
  config.seed = o.env_seed;
  return mrl::generate_suite(config);
}

std::optional<mrl::EndpointConfig> parse_endpoint(const std::string& text) {
  if (text.empty()) return std::nullopt;
  mrl::EndpointConfig e;
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw mrl::ConfigError("--endpoint expects host:port[/path]");
  e.host = text.substr(0, colon);
  std::string rest = text.substr(colon + 1);
  const auto slash = rest.find('/');
  if (slash != std::string::npos) {
    e.base_path = rest.substr(slash);
    rest = rest.substr(0, slash);
  }
  try {
    e.port = std::stoi(rest);
  } catch (const std::exception&) {
    throw mrl::ConfigError("bad port in --endpoint '" + text + "'");
  }
  return e;
}

// ---- subcommands -------------------------------------------------------------

int cmd_gen_env(const EnvOptions& o, const std::string& out) {
  const mrl::Environment env = make_env(o);
  write_json_file(out, env.to_json());
  for (const mrl::TaskSpec& t : env.tasks()) {
    std::printf("%-16s %-6s shortest=%d  %s\n", t.instruction.key.c_str(),
                std::string(mrl::difficulty_name(t.instruction.difficulty)).c_str(),
                t.shortest_length, t.instruction.goal_text.c_str());
  }
  return kExitOk;
}

struct TrainOptions {
  EnvOptions env;
  std::string mode = "admire";
  std::optional<int> iterations;
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string metrics_out;
  std::string store;
  std::string policy_out;
  std::string endpoint;
  std::optional<double> lambda0;
};

int cmd_train(const TrainOptions& o) {
  mrl::TrainConfig train;
  mrl::RewardConfig reward;
  if (!o.config.empty()) {
    const json j = read_json_file(o.config);
    train = mrl::train_config_from_json(j.value("train", json::object()));
    reward = mrl::reward_config_from_json(j.value("reward", json::object()));
  }
  if (o.iterations) train.iterations = *o.iterations;
  if (o.seed) train.seed = *o.seed;
  if (o.lambda0) reward.lambda0 = *o.lambda0;
  train.validate();
  reward.validate();
  const mrl::RewardMode mode = mrl::parse_reward_mode(o.mode);
  const mrl::Environment env = make_env(o.env);

  mrl::MilestoneStore store;
  if (!o.store.empty() && fs::exists(o.store)) store = mrl::MilestoneStore::load(o.store);
  std::unique_ptr<mrl::AbstractionProvider> provider;
  if (const auto endpoint = parse_endpoint(o.endpoint)) {
    provider = mrl::remote_provider(*endpoint);
  } else {
    provider = std::make_unique<mrl::ReferenceProvider>(env);
  }

  const mrl::TrainResult result = mrl::train(env, store, *provider, reward, train, mode);
  if (!o.metrics_out.empty()) {
    if (fs::path(o.metrics_out).has_parent_path()) {
      fs::create_directories(fs::path(o.metrics_out).parent_path());
    }
    mrl::write_metrics(o.metrics_out, result.history);
  }
  if (!o.store.empty()) store.save(o.store);
  if (!o.policy_out.empty()) write_json_file(o.policy_out, result.policy.to_json());

  for (const mrl::MetricsRow& row : result.history) {
    if (row.iteration % 50 == 0 || row.iteration == 1 || row.error) {
      std::printf("iter %4d  train_sr=%.3f  init_rate=%.3f  lambda=%.4f\n", row.iteration,
                  row.success_rate, row.milestone_initialization_rate, row.lambda);
    }
  }
  if (result.error) {
    std::fprintf(stderr, "training halted: %s\n", result.error->c_str());
    return kExitRuntime;
  }
  const mrl::MetricsRow& first = result.history.front();
  const mrl::MetricsRow& last = result.history.back();
  if (first.initial_eval && last.final_eval) {
    std::printf("eval success: %.3f -> %.3f\n", first.initial_eval->overall,
                last.final_eval->overall);
    for (const auto& [tier, v] : last.final_eval->by_tier) {
      std::printf("  %-6s %.3f -> %.3f\n", tier.c_str(), first.initial_eval->by_tier.at(tier), v);
    }
  }
  return kExitOk;
}

struct ScoreOptions {
  EnvOptions env;
  std::string store;
  std::string trajectories;
  std::string config;
  int epoch = 1;
  std::string out;
};

int cmd_score(const ScoreOptions& o) {
  mrl::RewardConfig reward;
  if (!o.config.empty()) {
    reward = mrl::reward_config_from_json(read_json_file(o.config).value("reward", json::object()));
  }
  const mrl::Environment env = make_env(o.env);
  const mrl::MilestoneStore store =
      o.store.empty() ? mrl::MilestoneStore{} : mrl::MilestoneStore::load(o.store);
  std::vector<mrl::Trajectory> log = mrl::read_trajectory_log(o.trajectories);
  const mrl::CachingEmbedder embedder(std::make_shared<mrl::HashedBagOfWordsEmbedder>());

  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out, std::ios::trunc);
    if (!file) throw mrl::Error("cannot write " + o.out);
  }
  std::ostream& out = o.out.empty() ? std::cout : file;
  for (mrl::Trajectory& traj : log) {
    mrl::outcome_score(traj, env);
    std::optional<mrl::MatchTrace> trace;
    if (const auto set = store.find(traj.instruction_key)) {
      trace = mrl::match_trajectory(traj.action_descriptions(), *set, reward.delta, embedder);
    }
    for (const mrl::StepRewardRecord& r : mrl::total_rewards(traj, trace, reward, o.epoch)) {
      const json row = {{"instruction_key", traj.instruction_key},
                        {"t", r.t},
                        {"r_outcome", r.r_outcome},
                        {"r_format", r.r_format},
                        {"r_mil", r.r_mil},
                        {"r_total", r.r_total},
                        {"lambda", r.lambda_used}};
      out << row.dump() << '\n';
    }
  }
  return kExitOk;
}

int cmd_calibrate(const std::string& pairs_path, const std::string& grid_text,
                  const std::string& out) {
  const std::vector<mrl::LabeledPair> pairs = mrl::read_labeled_pairs(pairs_path);
  const std::vector<double> grid = mrl::parse_grid(grid_text);
  const mrl::HashedBagOfWordsEmbedder embedder;
  const auto rows = mrl::calibrate_delta(pairs, grid, embedder);
  std::ostringstream csv;
  csv << "delta,accuracy,tp,tn,fp,fn\n";
  for (const mrl::CalibrationRow& r : rows) {
    char line[128];
    std::snprintf(line, sizeof line, "%.4f,%.4f,%d,%d,%d,%d\n", r.delta, r.accuracy, r.tp, r.tn,
                  r.fp, r.fn);
    csv << line;
  }
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream f(out, std::ios::trunc);
    if (!f) throw mrl::Error("cannot write " + out);
    f << csv.str();
  }
  return kExitOk;
}

int cmd_run(const std::string& manifest_path) {
  const mrl::ExperimentManifest manifest = mrl::load_manifest(manifest_path);
  const mrl::ExperimentBundle bundle = mrl::run_experiment(manifest);
  int failed = 0;
  for (const mrl::RunRecord& r : bundle.runs) {
    if (r.error) {
      ++failed;
      std::fprintf(stderr, "%s seed %llu failed: %s\n",
                   std::string(mrl::reward_mode_name(r.mode)).c_str(),
                   static_cast<unsigned long long>(r.seed), r.error->c_str());
    }
  }
  for (const auto& [mode, s] : bundle.summary) {
    std::printf("%-8s runs=%d mean_final_success=%.4f\n", mode.c_str(), s.runs, s.mean_success);
  }
  std::printf("bundle written to %s\n", manifest.out_dir.string().c_str());
  return failed ? kExitRuntime : kExitOk;
}

int cmd_report(const std::vector<std::string>& files, const std::string& out) {
  std::vector<fs::path> paths;
  for (const std::string& f : files) {
    if (fs::is_directory(f)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(f)) {
        if (e.path().extension() == ".jsonl") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      paths.insert(paths.end(), found.begin(), found.end());
    } else {
      paths.emplace_back(f);
    }
  }
  if (paths.empty()) throw mrl::ConfigError("no metrics files found");
  const mrl::ReportTables tables = mrl::build_report(mrl::load_runs(paths));
  mrl::write_report(tables, out);
  std::ifstream summary(fs::path(out) / "summary.txt");
  std::cout << summary.rdbuf();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Milestone-shaped rewards for long-horizon navigation agents"};
  app.require_subcommand(1);

  EnvOptions gen_env;
  std::string gen_out = "env.json";
  CLI::App* gen = app.add_subcommand("gen-env", "Generate a task suite");
  add_env_options(gen, gen_env);
  gen->add_option("--out", gen_out, "Output environment JSON");

  TrainOptions train;
  CLI::App* tr = app.add_subcommand("train", "Train a tabular policy");
  add_env_options(tr, train.env);
  tr->add_option("--reward-mode", train.mode, "admire | outcome | process")
      ->check(CLI::IsMember({"admire", "outcome", "process", "outcome_only", "process_stub"}));
  tr->add_option("--iterations", train.iterations, "Training iterations");
  tr->add_option("--seed", train.seed, "Run seed");
  tr->add_option("--config", train.config, "JSON with \"train\" and \"reward\" objects")
      ->check(CLI::ExistingFile);
  tr->add_option("--metrics-out", train.metrics_out, "Metrics JSONL, one row per iteration");
  tr->add_option("--store", train.store, "Milestone store JSON (loaded if present, saved after)");
  tr->add_option("--policy-out", train.policy_out, "Write the trained policy table");
  tr->add_option("--endpoint", train.endpoint, "Remote abstraction endpoint host:port[/path]");
  tr->add_option("--lambda0", train.lambda0, "Override the milestone reward coefficient");

  ScoreOptions score;
  CLI::App* sc = app.add_subcommand("score", "Score logged trajectories offline");
  add_env_options(sc, score.env);
  sc->add_option("--trajectories", score.trajectories, "Trajectory JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  sc->add_option("--store", score.store, "Milestone store JSON")->check(CLI::ExistingFile);
  sc->add_option("--config", score.config, "JSON with a \"reward\" object")->check(CLI::ExistingFile);
  sc->add_option("--epoch", score.epoch, "Epoch for the milestone coefficient (1-based)");
  sc->add_option("--out", score.out, "Output JSONL (stdout when omitted)");

  std::string pairs;
  std::string grid = "0.55:0.95:0.05";
  std::string calib_out;
  CLI::App* cal = app.add_subcommand("calibrate-delta", "Sweep the match threshold");
  cal->add_option("--pairs", pairs, "Labeled pairs JSONL")->required()->check(CLI::ExistingFile);
  cal->add_option("--grid", grid, "start:stop:step or a single value");
  cal->add_option("--out", calib_out, "CSV output (stdout when omitted)");

  std::string manifest;
  CLI::App* run = app.add_subcommand("run", "Run an experiment manifest");
  run->add_option("manifest", manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);

  std::vector<std::string> metrics_files;
  std::string report_out = "report";
  CLI::App* rep = app.add_subcommand("report", "Build report tables from metrics files");
  rep->add_option("metrics", metrics_files, "Metrics JSONL files or directories")->required();
  rep->add_option("--out", report_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*gen) return cmd_gen_env(gen_env, gen_out);
    if (*tr) return cmd_train(train);
    if (*sc) return cmd_score(score);
    if (*cal) return cmd_calibrate(pairs, grid, calib_out);
    if (*run) return cmd_run(manifest);
    if (*rep) return cmd_report(metrics_files, report_out);
  } catch (const mrl::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const mrl::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const mrl::VersionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const mrl::GenerationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
