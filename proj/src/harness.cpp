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

#include "mrl/harness.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "mrl/error.hpp"
#include "mrl/metrics.hpp"
#include "mrl/milestone_memory.hpp"

namespace mrl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string run_label(std::string_view mode, std::uint64_t seed) {
  return std::string(mode) + "_seed" + std::to_string(seed);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

Environment load_environment(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open environment file " + path.string());
  try {
    return Environment::from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace

void ExperimentManifest::validate() const {
  if (modes.empty()) throw ConfigError("manifest lists no reward modes");
  if (seeds.empty()) throw ConfigError("manifest lists no seeds");
  std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) throw ConfigError("manifest seeds must be distinct");
  std::set<RewardMode> unique_modes(modes.begin(), modes.end());
  if (unique_modes.size() != modes.size()) throw ConfigError("manifest modes must be distinct");
  if (env_file && !fs::exists(*env_file)) {
    throw ConfigError("environment file " + env_file->string() + " does not exist");
  }
  if (out_dir.empty()) throw ConfigError("manifest needs an output directory");
  train.validate();
  reward.validate();
}

ExperimentManifest parse_manifest(const json& j, const fs::path& base_dir) {
  ExperimentManifest m;
  m.source = j;
  try {
    auto resolve = [&](const std::string& p) {
      const fs::path path(p);
      return path.is_absolute() ? path : base_dir / path;
    };
    const json env = j.value("env", json::object());
    if (env.contains("file")) {
      m.env_file = resolve(env.at("file").get<std::string>());
    } else {
      m.suite = parse_suite(env.value("suite", std::string("easy:4,medium:4,hard:4")));
      m.suite.seed = env.value("seed", m.suite.seed);
    }
    for (const json& mode : j.at("modes")) m.modes.push_back(parse_reward_mode(mode.get<std::string>()));
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.train = train_config_from_json(j.value("train", json::object()));
    m.reward = reward_config_from_json(j.value("reward", json::object()));
    m.out_dir = resolve(j.at("out").get<std::string>());
    if (j.contains("provider")) {
      const json& p = j.at("provider");
      const std::string kind = p.value("kind", std::string("reference"));
      if (kind == "remote") {
        EndpointConfig e;
        e.host = p.value("host", e.host);
        e.port = p.value("port", e.port);
        e.base_path = p.value("base_path", e.base_path);
        e.timeout_seconds = p.value("timeout_seconds", e.timeout_seconds);
        m.endpoint = e;
      } else if (kind != "reference") {
        throw ConfigError("unknown provider kind '" + kind + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  } catch (const ParseError& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
  m.validate();
  return m;
}

ExperimentManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_manifest(j, path.parent_path());
}

std::map<std::string, ModeSummary> summarize_runs(const std::vector<RunRecord>& runs) {
  std::map<std::string, ModeSummary> out;
  std::map<std::string, std::map<std::string, int>> tier_counts;
  for (const RunRecord& r : runs) {
    ModeSummary& s = out[std::string(reward_mode_name(r.mode))];
    if (!r.final_eval) {
      ++s.failed_runs;
      continue;
    }
    ++s.runs;
    s.mean_success += r.final_eval->overall;
    for (const auto& [tier, v] : r.final_eval->by_tier) {
      s.mean_by_tier[tier] += v;
      ++tier_counts[std::string(reward_mode_name(r.mode))][tier];
    }
  }
  for (auto& [mode, s] : out) {
    if (s.runs > 0) s.mean_success /= s.runs;
    for (auto& [tier, v] : s.mean_by_tier) v /= tier_counts[mode][tier];
  }
  return out;
}

namespace {

std::map<std::string, double> deltas(const std::map<std::string, ModeSummary>& summary) {
  std::map<std::string, double> out;
  auto a = summary.find("admire");
  auto o = summary.find("outcome");
  if (a == summary.end() || o == summary.end() || !a->second.runs || !o->second.runs) return out;
  out["overall"] = a->second.mean_success - o->second.mean_success;
  for (const auto& [tier, v] : a->second.mean_by_tier) {
    auto it = o->second.mean_by_tier.find(tier);
    if (it != o->second.mean_by_tier.end()) out[tier] = v - it->second;
  }
  return out;
}

}  // namespace

json to_json(const ExperimentBundle& bundle) {
  json runs = json::array();
  for (const RunRecord& r : bundle.runs) {
    json run = {{"mode", reward_mode_name(r.mode)},
                {"seed", r.seed},
                {"metrics", r.metrics_path.filename().string()}};
    if (r.error) run["error"] = *r.error;
    if (r.final_eval) run["final_eval"] = to_json(*r.final_eval);
    runs.push_back(std::move(run));
  }
  json summary = json::object();
  for (const auto& [mode, s] : bundle.summary) {
    summary[mode] = {{"runs", s.runs},
                     {"failed_runs", s.failed_runs},
                     {"mean_success", s.mean_success},
                     {"mean_by_tier", s.mean_by_tier}};
  }
  return {{"runs", std::move(runs)},
          {"summary", std::move(summary)},
          {"admire_minus_outcome", bundle.admire_minus_outcome}};
}

ExperimentBundle run_experiment(const ExperimentManifest& manifest) {
  manifest.validate();
  const Environment env =
      manifest.env_file ? load_environment(*manifest.env_file) : generate_suite(manifest.suite);
  fs::create_directories(manifest.out_dir / "metrics");
  write_text(manifest.out_dir / "manifest.json", manifest.source.dump(2) + "\n");
  write_text(manifest.out_dir / "env.json", env.to_json().dump() + "\n");

  ExperimentBundle bundle;
  for (RewardMode mode : manifest.modes) {
    for (std::uint64_t seed : manifest.seeds) {
      RunRecord record;
      record.mode = mode;
      record.seed = seed;
      record.metrics_path =
          manifest.out_dir / "metrics" / (run_label(reward_mode_name(mode), seed) + ".jsonl");
      try {
        TrainConfig config = manifest.train;
        config.seed = seed;
        MilestoneStore store;
        std::unique_ptr<AbstractionProvider> provider;
        if (manifest.endpoint) {
          provider = remote_provider(*manifest.endpoint);
        } else {
          provider = std::make_unique<ReferenceProvider>(env);
        }
        TrainResult result = train(env, store, *provider, manifest.reward, config, mode);
        write_metrics(record.metrics_path, result.history);
        record.error = result.error;
        if (result.completed && !result.history.empty()) {
          record.final_eval = result.history.back().final_eval;
        }
        if (mode == RewardMode::kAdmire) {
          store.save(manifest.out_dir / "metrics" /
                     (run_label(reward_mode_name(mode), seed) + "_milestones.json"));
        }
      } catch (const std::exception& e) {
        record.error = e.what();
      }
      bundle.runs.push_back(std::move(record));
    }
  }
  bundle.summary = summarize_runs(bundle.runs);
  bundle.admire_minus_outcome = deltas(bundle.summary);
  write_text(manifest.out_dir / "summary.json", to_json(bundle).dump(2) + "\n");
  return bundle;
}

// ---- report ------------------------------------------------------------------

std::vector<RunSeries> load_runs(const std::vector<fs::path>& metrics_files) {
  std::vector<RunSeries> runs;
  for (const fs::path& path : metrics_files) {
    std::vector<MetricsRow> rows = read_metrics(path);
    if (rows.empty()) throw PreconditionError(path.string() + " holds no metrics rows");
    RunSeries series{rows.front().mode, rows.front().seed, std::move(rows)};
    runs.push_back(std::move(series));
  }
  return runs;
}

ReportTables build_report(const std::vector<RunSeries>& runs) {
  if (runs.empty()) throw PreconditionError("report needs at least one metrics file");
  ReportTables out;
  std::vector<RunRecord> records;
  std::map<std::string, std::pair<PhaseTimes, int>> wall;
  for (const RunSeries& run : runs) {
    if (run.rows.empty()) throw PreconditionError("run " + run_label(run.mode, run.seed) + " is empty");
    const std::string label = run_label(run.mode, run.seed);
    const MetricsRow& first = run.rows.front();
    const MetricsRow& last = run.rows.back();
    if (first.initial_eval && last.final_eval) {
      out.tiers.push_back({run.mode, run.seed, "overall", first.initial_eval->overall,
                           last.final_eval->overall});
      for (const auto& [tier, v] : last.final_eval->by_tier) {
        auto it = first.initial_eval->by_tier.find(tier);
        out.tiers.push_back({run.mode, run.seed, tier,
                             it == first.initial_eval->by_tier.end() ? 0.0 : it->second, v});
      }
    }
    RunRecord record;
    record.mode = parse_reward_mode(run.mode);
    record.seed = run.seed;
    record.final_eval = last.final_eval;
    records.push_back(std::move(record));

    std::vector<double>& init = out.init_rate[label];
    bool nondecreasing = true;
    auto& [times, n] = wall[run.mode];
    for (const MetricsRow& row : run.rows) {
      if (row.error) continue;
      if (!init.empty() && row.milestone_initialization_rate < init.back()) nondecreasing = false;
      init.push_back(row.milestone_initialization_rate);
      times.rollout += row.wall.rollout;
      times.reward += row.wall.reward;
      times.update += row.wall.update;
      ++n;
      for (const auto& [task, counts] : row.hit_counts) {
        out.hit_series[label][task][row.iteration] = counts;
      }
    }
    out.init_rate_nondecreasing[label] = nondecreasing;
  }
  for (const auto& [mode, s] : summarize_runs(records)) {
    if (s.runs == 0) continue;
    out.mean_final[mode]["overall"] = s.mean_success;
    for (const auto& [tier, v] : s.mean_by_tier) out.mean_final[mode][tier] = v;
  }
  out.admire_minus_outcome = deltas(summarize_runs(records));
  for (const auto& [mode, tn] : wall) {
    if (tn.second == 0) continue;
    const double n = tn.second;
    out.mean_wall[mode] = {tn.first.rollout / n, tn.first.reward / n, tn.first.update / n};
  }
  auto a = out.mean_wall.find("admire");
  auto o = out.mean_wall.find("outcome");
  if (a != out.mean_wall.end() && o != out.mean_wall.end() && o->second.reward > 0.0) {
    out.reward_phase_ratio = a->second.reward / o->second.reward;
  }
  return out;
}

void write_report(const ReportTables& t, const fs::path& out_dir) {
  fs::create_directories(out_dir / "hit_counts");

  std::ostringstream tiers;
  tiers << "mode,seed,tier,initial_success,final_success\n";
  for (const auto& r : t.tiers) {
    tiers << r.mode << ',' << r.seed << ',' << r.tier << ',' << fmt(r.initial) << ','
          << fmt(r.final) << '\n';
  }
  write_text(out_dir / "tier_success.csv", tiers.str());

  std::ostringstream delta;
  delta << "tier,admire_minus_outcome\n";
  for (const auto& [tier, d] : t.admire_minus_outcome) delta << tier << ',' << fmt(d) << '\n';
  write_text(out_dir / "tier_delta.csv", delta.str());

  std::size_t longest = 0;
  for (const auto& [label, series] : t.init_rate) longest = std::max(longest, series.size());
  std::ostringstream init;
  init << "iteration";
  for (const auto& [label, series] : t.init_rate) init << ',' << label;
  init << '\n';
  for (std::size_t i = 0; i < longest; ++i) {
    init << i + 1;
    for (const auto& [label, series] : t.init_rate) {
      init << ',';
      if (i < series.size()) init << fmt(series[i]);
    }
    init << '\n';
  }
  write_text(out_dir / "init_rate.csv", init.str());

  std::ostringstream wall;
  wall << "mode,rollout_seconds,reward_seconds,update_seconds\n";
  for (const auto& [mode, w] : t.mean_wall) {
    wall << mode << ',' << fmt(w.rollout) << ',' << fmt(w.reward) << ',' << fmt(w.update) << '\n';
  }
  write_text(out_dir / "wall_times.csv", wall.str());

  for (const auto& [label, tasks] : t.hit_series) {
    for (const auto& [task, series] : tasks) {
      std::size_t width = 0;
      for (const auto& [it, counts] : series) width = std::max(width, counts.size());
      std::ostringstream csv;
      csv << "iteration";
      for (std::size_t j = 0; j < width; ++j) csv << ",m" << j;
      csv << '\n';
      for (const auto& [it, counts] : series) {
        csv << it;
        for (std::size_t j = 0; j < width; ++j) {
          csv << ',';
          if (j < counts.size()) csv << counts[j];
        }
        csv << '\n';
      }
      write_text(out_dir / "hit_counts" / (label + "_" + task + ".csv"), csv.str());
    }
  }

  std::ostringstream summary;
  summary << "Final success rate (mean over seeds)\n";
  for (const auto& [mode, tiers_of] : t.mean_final) {
    summary << "  " << mode << ':';
    for (const auto& [tier, v] : tiers_of) summary << ' ' << tier << '=' << fmt(v);
    summary << '\n';
  }
  if (!t.admire_minus_outcome.empty()) {
    summary << "admire - outcome:";
    for (const auto& [tier, d] : t.admire_minus_outcome) summary << ' ' << tier << '=' << fmt(d);
    summary << '\n';
  }
  summary << "Milestone initialization rate\n";
  for (const auto& [label, series] : t.init_rate) {
    const bool ok = t.init_rate_nondecreasing.at(label);
    summary << "  " << label << ": final=" << fmt(series.empty() ? 0.0 : series.back())
            << (ok ? " nondecreasing" : " FLAG: decreased during the run") << '\n';
  }
  summary << "Mean per-iteration wall time (s)\n";
  for (const auto& [mode, w] : t.mean_wall) {
    summary << "  " << mode << ": rollout=" << fmt(w.rollout) << " reward=" << fmt(w.reward)
            << " update=" << fmt(w.update) << '\n';
  }
  if (t.reward_phase_ratio) {
    summary << "Reward phase admire/outcome: " << fmt(*t.reward_phase_ratio) << '\n';
  }
  write_text(out_dir / "summary.txt", summary.str());
}

}  // namespace mrl
