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

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "doctest.h"
#include "mrl/error.hpp"
#include "mrl/matching.hpp"
#include "oracles/calibration_expected.hpp"
#include "oracles/match_properties.hpp"

using namespace mrl;

namespace {

MilestoneSet set_of(std::vector<std::string> texts) {
  MilestoneSet m;
  m.instruction_key = "k";
  for (auto& t : texts) m.milestones.push_back({std::move(t)});
  m.source_length = static_cast<int>(m.milestones.size());
  return m;
}

const HashedBagOfWordsEmbedder kEmbedder;

}  // namespace

TEST_CASE("identical actions hit every milestone in order") {
  const std::vector<std::string> texts{"Open the Notes app", "Click the 'New' button", "Input <Value> as the title"};
  const std::vector<std::string> actions{"Open the Notes app", "Click the 'New' button", "Input 'Bob' as the title"};
  const MatchTrace tr = match_trajectory(actions, set_of(texts), 0.75, kEmbedder);
  CHECK(tr.k == 3);
  CHECK(tr.K == 3);
  CHECK(tr.hit_steps == std::vector<int>{0, 1, 2});
  for (const MatchStep& s : tr.steps) CHECK(s.hit);
  CHECK(tr.steps[0].similarity == 1.0);
  CHECK(tr.steps[1].similarity == 1.0);
  // The placeholder drops out, the value token does not: 4 / sqrt(4 * 5).
  CHECK(tr.steps[2].similarity == doctest::Approx(4.0 / std::sqrt(20.0)).epsilon(1e-12));
}

TEST_CASE("out-of-order actions are not credited") {
  const auto m = set_of({"Open the Notes app", "Click the 'Save' button"});
  const std::vector<std::string> actions{"Click the 'Save' button", "Open the Notes app", "Click the 'Save' button"};
  const MatchTrace tr = match_trajectory(actions, m, 0.75, kEmbedder);
  CHECK_FALSE(tr.steps[0].hit);
  CHECK(tr.steps[0].pointer_after == 0);
  CHECK(tr.steps[1].hit);
  CHECK(tr.steps[2].hit);
  CHECK(tr.k == 2);

  // Reversing the milestone order changes the order-dependent pattern.
  const MatchTrace rev = match_trajectory(actions, set_of({"Click the 'Save' button", "Open the Notes app"}), 0.75, kEmbedder);
  CHECK(rev.hit_steps == std::vector<int>{0, 1});
  CHECK(rev.hit_steps != tr.hit_steps);
}

TEST_CASE("similarity equal to the threshold is not a hit") {
  const std::vector<EmbeddingVector> milestones{EmbeddingVector({1.0, 0.0})};
  const EmbeddingVector action({3.0, 4.0});
  const MatchTrace at = match_embedded(1, [&](std::size_t) -> const EmbeddingVector& { return action; }, milestones, 0.6);
  CHECK(at.steps[0].similarity == 0.6);
  CHECK_FALSE(at.steps[0].hit);
  const MatchTrace below = match_embedded(1, [&](std::size_t) -> const EmbeddingVector& { return action; }, milestones, 0.59);
  CHECK(below.steps[0].hit);
}

TEST_CASE("no hits once every milestone is done") {
  const auto m = set_of({"Click the 'Save' button"});
  const std::vector<std::string> actions{"Click the 'Save' button", "Click the 'Save' button", "Click the 'Save' button"};
  const MatchTrace tr = match_trajectory(actions, m, 0.75, kEmbedder);
  CHECK(tr.k == 1);
  CHECK(tr.hit_steps == std::vector<int>{0});
  CHECK(tr.steps[1].similarity == 0.0);
  CHECK(tr.steps[2].pointer_before == 1);
}

TEST_CASE("matcher guards") {
  const std::vector<std::string> actions{"x"};
  CHECK_THROWS_AS(match_trajectory(actions, set_of({}), 0.75, kEmbedder), PreconditionError);
  CHECK_THROWS_AS(match_trajectory(actions, set_of({"x"}), 1.0, kEmbedder), ConfigError);
  CHECK_THROWS_AS(match_trajectory(actions, set_of({"x"}), 0.0, kEmbedder), ConfigError);
}

TEST_CASE("matcher object agrees with the free function") {
  const auto m = set_of({"Open the Notes app", "Click the 'Save' button"});
  const MilestoneMatcher matcher(m, 0.75, kEmbedder);
  const std::vector<std::string> actions{"Open the Notes app", "Scroll down on the page", "Click the 'Save' button"};
  CHECK(matcher.match(actions) == match_trajectory(actions, m, 0.75, kEmbedder));
}

TEST_CASE("matcher properties on random cases") {
  Rng rng(123);
  for (int i = 0; i < 2000; ++i) {
    const oracle::MatchCase c = oracle::random_match_case(rng);
    std::vector<std::string> texts = c.milestones;
    const MatchTrace tr = match_trajectory(c.actions, set_of(texts), c.delta, kEmbedder);
    const std::string err = oracle::check_match_properties(c, tr, kEmbedder);
    CAPTURE(i);
    REQUIRE(err.empty());
  }
}

TEST_CASE("calibration against the frozen fixture sweep") {
  const auto pairs = read_labeled_pairs(MRL_FIXTURE_DIR "/calibration_pairs.jsonl");
  REQUIRE(pairs.size() == 100);
  std::vector<double> grid;
  for (const auto& row : oracle::kCalibration) grid.push_back(row.delta);
  const auto rows = calibrate_delta(pairs, grid, kEmbedder);
  REQUIRE(rows.size() == grid.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CAPTURE(grid[i]);
    CHECK(rows[i].delta == oracle::kCalibration[i].delta);
    CHECK(rows[i].tp == oracle::kCalibration[i].tp);
    CHECK(rows[i].tn == oracle::kCalibration[i].tn);
    CHECK(rows[i].fp == oracle::kCalibration[i].fp);
    CHECK(rows[i].fn == oracle::kCalibration[i].fn);
    CHECK(rows[i].accuracy == oracle::kCalibration[i].accuracy);
    CHECK(rows[i].tp + rows[i].tn + rows[i].fp + rows[i].fn == 100);
  }
  SUBCASE("documented optimum") {
    const double best = oracle::kCalibrationBestDelta;
    const auto at = calibrate_delta(pairs, std::vector<double>{best}, kEmbedder);
    CHECK(at[0].accuracy == oracle::kCalibrationBestAccuracy);
  }
  SUBCASE("near-one threshold rejects everything") {
    const auto at = calibrate_delta(pairs, std::vector<double>{0.999}, kEmbedder);
    CHECK(at[0].tp + at[0].fp == 0);
    CHECK(at[0].accuracy == 0.5);
  }
  SUBCASE("rows partition the pairs") {
    for (const auto& r : calibrate_delta(pairs, std::vector<double>{0.5, 0.75, 0.9}, kEmbedder)) {
      CHECK(r.tp + r.tn + r.fp + r.fn == 100);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(calibrate_delta(pairs, std::vector<double>{}, kEmbedder), ConfigError);
    CHECK_THROWS_AS(calibrate_delta({}, std::vector<double>{0.5}, kEmbedder), PreconditionError);
  }
}

TEST_CASE("grid parsing") {
  const auto g = parse_grid("0.55:0.95:0.05");
  REQUIRE(g.size() == 9);
  CHECK(g.front() == 0.55);
  CHECK(g.back() == 0.95);
  CHECK(g[4] == 0.75);
  CHECK(parse_grid("0.8") == std::vector<double>{0.8});
  CHECK_THROWS_AS(parse_grid("a:b:c"), ParseError);
  CHECK_THROWS_AS(parse_grid("0.9:0.5:0.1"), ParseError);
  CHECK_THROWS_AS(parse_grid("0.5:0.9"), ParseError);
}
