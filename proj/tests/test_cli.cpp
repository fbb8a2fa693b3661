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

#include <sys/wait.h>

#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "mrl/metrics.hpp"
#include "mrl/milestone_memory.hpp"
#include "mrl/trajectory.hpp"
#include "oracles/calibration_expected.hpp"
#include "test_support.hpp"

using nlohmann::json;

namespace {

// Runs the CLI with stdout and stderr sent to `log`; returns the exit code.
int mrl_cli(const std::string& args, const std::filesystem::path& log, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" + MRL_CLI_PATH + "\" " + args +
                          " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

std::string q(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n' ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("gen-env") {
  testing::TempDir dir;
  const auto log = dir / "log.txt";
  CHECK(mrl_cli("gen-env --env-seed 3 --suite easy:2,medium:1,hard:1 --out " + q(dir / "a.json"), log) == 0);
  CHECK(mrl_cli("gen-env --env-seed 3 --suite easy:2,medium:1,hard:1 --out " + q(dir / "b.json"), log) == 0);
  CHECK(testing::slurp(dir / "a.json") == testing::slurp(dir / "b.json"));
  CHECK(json::parse(testing::slurp(dir / "a.json"))["tasks"].size() == 4);
  CHECK(mrl_cli("gen-env --suite easy:two --out " + q(dir / "c.json"), log) == 1);
  CHECK(mrl_cli("gen-env --bogus", log) == 1);
  CHECK(mrl_cli("", log) == 1);
}

TEST_CASE("train") {
  testing::TempDir dir;
  const auto log = dir / "log.txt";
  const std::string base = "train --suite easy:2,medium:1,hard:1 --iterations 2 --seed 5 ";
  REQUIRE(mrl_cli(base + "--metrics-out " + q(dir / "m/admire.jsonl") + " --store " + q(dir / "store.json") +
                      " --policy-out " + q(dir / "policy.json"),
                  log) == 0);
  CHECK(mrl::read_metrics(dir / "m/admire.jsonl").size() == 2);
  CHECK(std::filesystem::exists(dir / "store.json"));
  CHECK(std::filesystem::exists(dir / "policy.json"));
  CHECK(mrl_cli(base + "--reward-mode outcome --metrics-out " + q(dir / "m/outcome.jsonl"), log) == 0);
  CHECK(mrl::read_metrics(dir / "m/outcome.jsonl").front().mode == "outcome");

  CHECK(mrl_cli(base + "--reward-mode sparkle", log) == 1);
  CHECK(mrl_cli(base + "--lambda0 -1", log) == 1);
  testing::spit(dir / "cfg.json", R"({"train": {"group_size": 1}})");
  CHECK(mrl_cli(base + "--config " + q(dir / "cfg.json"), log) == 1);
  CHECK(mrl_cli(base + "--env " + q(dir / "missing.json"), log) == 1);
  CHECK(mrl_cli(base + "--endpoint 127.0.0.1:1 --metrics-out " + q(dir / "m/down.jsonl"), log) == 2);
  CHECK(testing::slurp(log).find("training halted") != std::string::npos);
  CHECK(mrl::read_metrics(dir / "m/down.jsonl").back().error.has_value());
}

TEST_CASE("score") {
  testing::TempDir dir;
  const auto log = dir / "log.txt";
  const mrl::Environment env = testing::tiny_env();
  testing::spit(dir / "env.json", env.to_json().dump());
  const auto win = testing::scripted(env, "note_bob", {"click(\"search\")", "scroll(up)", "input(\"Bob\", \"note name\")"});
  const auto lose = testing::scripted(env, "note_bob", {"scroll(down)", "click(search)"});
  mrl::write_trajectory_log({win, lose}, dir / "log.jsonl");

  mrl::MilestoneStore store;
  mrl::ReferenceProvider provider(env);
  store.maybe_update(testing::scripted(env, "note_bob", {"click(\"search\")", "input(\"Bob\", \"note name\")"}),
                     env.task("note_bob").instruction, provider);
  store.save(dir / "store.json");

  REQUIRE(mrl_cli("score --env " + q(dir / "env.json") + " --trajectories " + q(dir / "log.jsonl") +
                      " --store " + q(dir / "store.json") + " --out " + q(dir / "scores.jsonl"),
                  log) == 0);
  const std::string text = testing::slurp(dir / "scores.jsonl");
  CHECK(count_lines(text) == 5);
  std::istringstream in(text);
  std::string line;
  std::vector<json> rows;
  while (std::getline(in, line)) rows.push_back(json::parse(line));
  CHECK(rows[0]["r_mil"].get<double>() > 0.0);
  CHECK(rows[2]["r_outcome"].get<double>() == 1.0);
  CHECK(rows[4]["r_format"].get<double>() < 0.0);
  CHECK(rows[4]["r_outcome"].get<double>() == 0.0);

  CHECK(mrl_cli("score --env " + q(dir / "env.json") + " --trajectories " + q(dir / "nowhere.jsonl"), log) == 1);
  testing::spit(dir / "broken.jsonl", "{\"not\": \"a trajectory\"}\n");
  CHECK(mrl_cli("score --env " + q(dir / "env.json") + " --trajectories " + q(dir / "broken.jsonl"), log) == 1);
}

TEST_CASE("calibrate-delta") {
  testing::TempDir dir;
  const auto log = dir / "log.txt";
  const std::string pairs = q(std::filesystem::path(MRL_FIXTURE_DIR) / "calibration_pairs.jsonl");
  REQUIRE(mrl_cli("calibrate-delta --pairs " + pairs + " --grid 0.5:0.95:0.05 --out " + q(dir / "a.csv"), log) == 0);
  std::string expected = "delta,accuracy,tp,tn,fp,fn\n";
  for (const auto& r : oracle::kCalibration) {
    if (r.delta > 0.951) continue;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.4f,%.4f,%d,%d,%d,%d\n", r.delta, r.accuracy, r.tp, r.tn, r.fp, r.fn);
    expected += buf;
  }
  CHECK(testing::slurp(dir / "a.csv") == expected);

  REQUIRE(mrl_cli("calibrate-delta --pairs " + pairs + " --grid 0.5:0.95:0.05 --out " + q(dir / "b.csv"), log,
                  "MRL_FORCE_SCALAR=1") == 0);
  CHECK(testing::slurp(dir / "a.csv") == testing::slurp(dir / "b.csv"));

  CHECK(mrl_cli("calibrate-delta --pairs " + pairs + " --grid 0.9:0.5:0.1", log) == 1);
  CHECK(mrl_cli("calibrate-delta --pairs " + q(dir / "none.jsonl"), log) == 1);
}

TEST_CASE("run and report") {
  testing::TempDir dir;
  const auto log = dir / "log.txt";
  const json manifest = {{"env", {{"seed", 7}, {"suite", "easy:2,medium:1,hard:1"}}},
                         {"modes", {"admire", "outcome"}},
                         {"seeds", {1, 2}},
                         {"train", {{"iterations", 4}, {"eval_rollouts", 2}}},
                         {"out", "bundle"}};
  testing::spit(dir / "manifest.json", manifest.dump());
  REQUIRE(mrl_cli("run " + q(dir / "manifest.json"), log) == 0);
  CHECK(std::filesystem::exists(dir / "bundle/summary.json"));

  REQUIRE(mrl_cli("report " + q(dir / "bundle/metrics") + " --out " + q(dir / "report"), log) == 0);
  CHECK(testing::slurp(log).find("admire - outcome:") != std::string::npos);
  for (const char* f : {"tier_success.csv", "tier_delta.csv", "init_rate.csv", "wall_times.csv", "summary.txt"}) {
    CHECK(std::filesystem::exists(dir / "report" / f));
  }
  CHECK(count_lines(testing::slurp(dir / "report/tier_success.csv")) == 1 + 4 * 4);

  json bad = manifest;
  bad["env"] = {{"file", "missing.json"}};
  testing::spit(dir / "bad.json", bad.dump());
  CHECK(mrl_cli("run " + q(dir / "bad.json"), log) == 1);

  std::filesystem::create_directories(dir / "empty");
  CHECK(mrl_cli("report " + q(dir / "empty") + " --out " + q(dir / "r2"), log) == 1);
  testing::spit(dir / "junk.jsonl", "not json\n");
  CHECK(mrl_cli("report " + q(dir / "junk.jsonl") + " --out " + q(dir / "r3"), log) == 1);
}
