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
#include <numeric>
#include <vector>

#include "doctest.h"
#include "mrl/error.hpp"
#include "mrl/grpo.hpp"
#include "oracles/gradient_check.hpp"
#include "test_support.hpp"

using namespace mrl;

namespace {

Trajectory with_steps(const std::string& key, std::size_t n) {
  Trajectory t;
  t.instruction_key = key;
  for (std::size_t i = 0; i < n; ++i) t.steps.push_back({static_cast<int>(i), {"S", {}}, {"x", "X", true}});
  return t;
}

std::vector<StepRewardRecord> records(const std::vector<double>& totals) {
  std::vector<StepRewardRecord> out;
  for (std::size_t i = 0; i < totals.size(); ++i) {
    StepRewardRecord r;
    r.t = static_cast<int>(i);
    r.r_total = totals[i];
    out.push_back(r);
  }
  return out;
}

AdvantageBatch normalize(const std::vector<std::vector<double>>& totals, const std::string& key = "k") {
  std::vector<Trajectory> group;
  std::vector<std::vector<StepRewardRecord>> recs;
  for (const auto& t : totals) {
    group.push_back(with_steps(key, t.size()));
    recs.push_back(records(t));
  }
  return normalize_advantages(group, recs);
}

std::pair<double, double> moments(const AdvantageBatch& b) {
  std::vector<double> all;
  for (const auto& a : b.advantages) all.insert(all.end(), a.begin(), a.end());
  const double mean = std::accumulate(all.begin(), all.end(), 0.0) / all.size();
  double var = 0.0;
  for (double x : all) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / all.size())};
}

}  // namespace

TEST_CASE("advantage normalization examples") {
  const AdvantageBatch a = normalize({{1, 0}, {1, 0}});
  CHECK(a.advantages == std::vector<std::vector<double>>{{1, -1}, {1, -1}});
  CHECK(a.mean == 0.5);
  CHECK(a.std == 0.5);
  CHECK_FALSE(a.degenerate);

  const AdvantageBatch b = normalize({{2, 0}});
  CHECK(b.advantages == std::vector<std::vector<double>>{{1, -1}});

  const AdvantageBatch c = normalize({{0.3, 0.3}, {0.3}});
  CHECK(c.degenerate);
  CHECK(c.advantages == std::vector<std::vector<double>>{{0, 0}, {0}});
}

TEST_CASE("advantage normalization errors") {
  std::vector<Trajectory> group{with_steps("a", 1), with_steps("b", 1)};
  std::vector<std::vector<StepRewardRecord>> recs{records({1}), records({0})};
  CHECK_THROWS_AS(normalize_advantages(group, recs), PreconditionError);
  CHECK_THROWS_AS(normalize_advantages({}, {}), PreconditionError);
  group = {with_steps("a", 2)};
  recs = {records({1})};
  CHECK_THROWS_AS(normalize_advantages(group, recs), PreconditionError);
}

TEST_CASE("normalized groups have zero mean and unit spread") {
  Rng rng(8);
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<std::vector<double>> totals(2 + rng.below(8));
    const double offset = 10.0 * rng.uniform() - 5.0;
    for (auto& t : totals) {
      t.resize(1 + rng.below(20));
      for (double& x : t) x = offset + (rng.below(3) == 0 ? 1.0 : 0.0) + 0.3 * rng.uniform() - 0.5 * (rng.below(5) == 0);
    }
    const AdvantageBatch b = normalize(totals);
    if (b.degenerate) continue;
    const auto [mean, sd] = moments(b);
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(sd - 1.0) < 1e-9);
  }
}

TEST_CASE("clipped term") {
  CHECK(clipped_term(1.0, 0.37, 0.2) == 0.37);
  CHECK(clipped_term(1.0, -2.0, 0.2) == -2.0);
  CHECK(clipped_term(1.5, 2.0, 0.2) == doctest::Approx(2.4).epsilon(1e-15));
  CHECK(clipped_term(0.5, -1.0, 0.2) == doctest::Approx(-0.8).epsilon(1e-15));
  Rng rng(4);
  for (int i = 0; i < 10000; ++i) {
    const double r = 1e-3 + 3.0 * rng.uniform();
    const double a = 6.0 * rng.uniform() - 3.0;
    const double eps = 0.05 + 0.9 * rng.uniform();
    const double v = clipped_term(r, a, eps);
    CHECK(std::abs(v) <= std::max(r, 1.0 + eps) * std::abs(a) + 1e-15);
    CHECK(v <= r * a + 1e-15);
  }
}

TEST_CASE("policy basics") {
  const Environment env = generate_suite(SuiteConfig{});
  TabularPolicy policy = TabularPolicy::for_environment(env);
  CHECK_THROWS_AS(TabularPolicy(0.0), ConfigError);
  for (const auto& [key, logits] : policy.table()) {
    const auto p = policy.probabilities(key);
    CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-9);
  }
  SUBCASE("every rollout state has an entry") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      for (const TaskSpec& task : env.tasks()) CHECK_NOTHROW(rollout(env, policy, task, seed));
    }
  }
  SUBCASE("extreme logits stay finite") {
    const std::string key = policy.table().begin()->first;
    auto l = policy.logits_by_key(key);
    l[0] = 800.0;
    const auto p = policy.probabilities(key);
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(std::isfinite(policy.log_prob(key, 1)));
  }
  SUBCASE("json round trip") {
    policy.mutable_table().begin()->second[0] = 0.123456789012345;
    CHECK(TabularPolicy::from_json(policy.to_json()) == policy);
  }
  SUBCASE("lookups") {
    CHECK_THROWS_AS(policy.logits("Nowhere", "x"), LookupError);
    CHECK_THROWS_AS(policy.log_prob(policy.table().begin()->first, 999), LookupError);
  }
}

TEST_CASE("surrogate at the snapshot") {
  Rng rng(6);
  TabularPolicy policy;
  policy.set_entry("A", "k", {0.3, -0.2, 1.0});
  policy.set_entry("B", "k", {0.0, 0.5});
  const std::vector<PolicySample> samples{{TabularPolicy::key("A", "k"), 2, 1.0},
                                          {TabularPolicy::key("B", "k"), 0, -1.0},
                                          {TabularPolicy::key("A", "k"), 0, 0.5},
                                          {TabularPolicy::key("B", "k"), 1, -0.5}};
  const SurrogateResult r = surrogate_and_gradient(policy, policy, samples, 0.2);
  CHECK(std::abs(r.objective) < 1e-15);

  SUBCASE("single positive sample ascends its action") {
    const std::vector<PolicySample> one{{TabularPolicy::key("A", "k"), 1, 0.8}};
    const SurrogateResult g = surrogate_and_gradient(policy, policy, one, 0.2);
    CHECK(g.gradient.at(TabularPolicy::key("A", "k"))[1] > 0.0);
    CHECK(g.gradient.at(TabularPolicy::key("A", "k"))[0] < 0.0);
    oracle::GradientInstance inst{policy, policy, one, 0.2};
    CHECK(*oracle::gradient_relative_error(inst) < 1e-4);
  }
  SUBCASE("zero advantages give a zero gradient") {
    std::vector<PolicySample> zero = samples;
    for (auto& s : zero) s.advantage = 0.0;
    const SurrogateResult g = surrogate_and_gradient(policy, policy, zero, 0.2);
    CHECK(g.objective == 0.0);
    for (const auto& [key, v] : g.gradient) {
      for (double x : v) CHECK(x == 0.0);
    }
  }
  SUBCASE("linear in the advantages") {
    std::vector<PolicySample> doubled = samples;
    for (auto& s : doubled) s.advantage *= 2.0;
    const SurrogateResult g1 = surrogate_and_gradient(policy, policy, samples, 0.2);
    const SurrogateResult g2 = surrogate_and_gradient(policy, policy, doubled, 0.2);
    for (const auto& [key, v] : g1.gradient) {
      for (std::size_t i = 0; i < v.size(); ++i) CHECK(g2.gradient.at(key)[i] == doctest::Approx(2.0 * v[i]).epsilon(1e-12));
    }
  }
  SUBCASE("unknown action") {
    const std::vector<PolicySample> bad{{TabularPolicy::key("B", "k"), 5, 1.0}};
    CHECK_THROWS_AS(surrogate_and_gradient(policy, policy, bad, 0.2), LookupError);
    const std::vector<PolicySample> missing{{TabularPolicy::key("C", "k"), 0, 1.0}};
    CHECK_THROWS_AS(surrogate_and_gradient(policy, policy, missing, 0.2), LookupError);
  }
}

TEST_CASE("shifting raw totals leaves advantages and the gradient unchanged") {
  Rng rng(12);
  TabularPolicy policy;
  policy.set_entry("A", "k", {0.1, 0.4, -0.3});
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::vector<double>> totals(4);
    for (auto& t : totals) {
      t.resize(3);
      for (double& x : t) x = rng.uniform();
    }
    auto shifted = totals;
    const double c = 7.0 * rng.uniform() - 3.0;
    for (auto& t : shifted) {
      for (double& x : t) x += c;
    }
    const AdvantageBatch a = normalize(totals);
    const AdvantageBatch b = normalize(shifted);
    std::vector<PolicySample> sa, sb;
    for (std::size_t i = 0; i < a.advantages.size(); ++i) {
      for (std::size_t t = 0; t < a.advantages[i].size(); ++t) {
        CHECK(std::abs(a.advantages[i][t] - b.advantages[i][t]) < 1e-9);
        sa.push_back({TabularPolicy::key("A", "k"), t, a.advantages[i][t]});
        sb.push_back({TabularPolicy::key("A", "k"), t, b.advantages[i][t]});
      }
    }
    const auto ga = surrogate_and_gradient(policy, policy, sa, 0.2).gradient.at(TabularPolicy::key("A", "k"));
    const auto gb = surrogate_and_gradient(policy, policy, sb, 0.2).gradient.at(TabularPolicy::key("A", "k"));
    for (std::size_t i = 0; i < ga.size(); ++i) CHECK(std::abs(ga[i] - gb[i]) < 1e-9);
  }
}

TEST_CASE("analytic gradient matches finite differences") {
  Rng rng(77);
  int checked = 0;
  int nonzero = 0;
  while (checked < 150) {
    const oracle::GradientInstance inst = oracle::random_gradient_instance(rng);
    bool nz = false;
    const auto err = oracle::gradient_relative_error(inst, &nz);
    if (!err) continue;
    ++checked;
    nonzero += nz ? 1 : 0;
    CAPTURE(checked);
    CHECK(*err < 1e-4);
  }
  CHECK(nonzero > 100);
}

TEST_CASE("samples from trajectories") {
  const Environment env = testing::tiny_env();
  const Trajectory t = testing::scripted(env, "note_bob", {"scroll(down)", "click(\"search\")"});
  const auto s = make_samples(env, t, std::vector<double>{0.5, -0.5});
  REQUIRE(s.size() == 2);
  CHECK(s[0].key == "Home|note_bob");
  CHECK(s[0].action == 1);
  CHECK(s[1].action == 0);
  CHECK(s[1].advantage == -0.5);
  CHECK_THROWS_AS(make_samples(env, t, std::vector<double>{0.5}), PreconditionError);
  Trajectory bad = t;
  bad.steps[0].action.raw_text = "open(\"X\")";
  CHECK_THROWS_AS(make_samples(env, bad, std::vector<double>{0.5, 0.5}), LookupError);
}
