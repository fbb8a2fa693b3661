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

#include "mrl/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "mrl/error.hpp"
#include "mrl/kernels/vector_ops.hpp"

namespace mrl {

using nlohmann::json;

// ---- policy ------------------------------------------------------------------

TabularPolicy::TabularPolicy(double temperature) : temperature_(temperature) {
  if (!(temperature > 0.0)) throw ConfigError("policy temperature must be positive");
}

std::string TabularPolicy::key(std::string_view screen, std::string_view instruction) {
  std::string k;
  k.reserve(screen.size() + instruction.size() + 1);
  k.append(screen);
  k.push_back('|');
  k.append(instruction);
  return k;
}

TabularPolicy TabularPolicy::for_environment(const Environment& env, double temperature) {
  TabularPolicy policy(temperature);
  for (const TaskSpec& task : env.tasks()) {
    std::set<std::string> seen{task.start_screen};
    std::deque<std::string> frontier{task.start_screen};
    while (!frontier.empty()) {
      const std::string screen = frontier.front();
      frontier.pop_front();
      policy.table_.emplace(key(screen, task.instruction.key),
                            std::vector<double>(env.menu(screen).size(), 0.0));
      auto from = env.edges().find(screen);
      if (from == env.edges().end()) continue;
      for (const auto& [action, edge] : from->second) {
        if (seen.insert(edge.to).second) frontier.push_back(edge.to);
      }
    }
  }
  return policy;
}

std::span<double> TabularPolicy::logits_by_key(std::string_view k) {
  auto it = table_.find(k);
  if (it == table_.end()) throw LookupError("policy has no entry for '" + std::string(k) + "'");
  return it->second;
}

std::span<const double> TabularPolicy::logits_by_key(std::string_view k) const {
  auto it = table_.find(k);
  if (it == table_.end()) throw LookupError("policy has no entry for '" + std::string(k) + "'");
  return it->second;
}

std::span<double> TabularPolicy::logits(std::string_view screen, std::string_view instruction) {
  return logits_by_key(key(screen, instruction));
}

std::span<const double> TabularPolicy::logits(std::string_view screen,
                                              std::string_view instruction) const {
  return logits_by_key(key(screen, instruction));
}

void TabularPolicy::set_entry(std::string_view screen, std::string_view instruction,
                              std::vector<double> logits) {
  table_.insert_or_assign(key(screen, instruction), std::move(logits));
}

void softmax(std::span<const double> logits, double temperature, std::span<double> out) {
  double max_logit = -INFINITY;
  for (double l : logits) max_logit = std::max(max_logit, l);
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp((logits[i] - max_logit) / temperature);
    total += out[i];
  }
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] /= total;
}

std::vector<double> TabularPolicy::probabilities(std::string_view k) const {
  std::span<const double> l = logits_by_key(k);
  std::vector<double> p(l.size());
  softmax(l, temperature_, p);
  return p;
}

double TabularPolicy::log_prob(std::string_view k, std::size_t action) const {
  std::span<const double> l = logits_by_key(k);
  if (action >= l.size()) {
    throw LookupError("action " + std::to_string(action) + " outside policy entry '" +
                      std::string(k) + "'");
  }
  double max_logit = -INFINITY;
  for (double v : l) max_logit = std::max(max_logit, v);
  double total = 0.0;
  for (double v : l) total += std::exp((v - max_logit) / temperature_);
  return (l[action] - max_logit) / temperature_ - std::log(total);
}

std::size_t TabularPolicy::choose(const Observation& observation, const TaskSpec& task,
                                  std::span<const ActionRecord> menu, Rng& rng) const {
  std::span<const double> l = logits(observation.screen_id, task.instruction.key);
  if (l.size() != menu.size()) {
    throw LookupError("policy entry for '" + observation.screen_id + "' does not match its menu");
  }
  std::vector<double> p(l.size());
  softmax(l, temperature_, p);
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return i;
  }
  return p.size() - 1;
}

json TabularPolicy::to_json() const {
  json entries = json::object();
  for (const auto& [k, v] : table_) entries[k] = v;
  return {{"temperature", temperature_}, {"entries", std::move(entries)}};
}

TabularPolicy TabularPolicy::from_json(const json& j) {
  try {
    TabularPolicy p(j.at("temperature").get<double>());
    for (const auto& [k, v] : j.at("entries").items()) {
      p.table_.emplace(k, v.get<std::vector<double>>());
    }
    return p;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed policy: ") + e.what());
  }
}

// ---- advantages --------------------------------------------------------------

AdvantageBatch normalize_advantages(std::span<const Trajectory> group,
                                    std::span<const std::vector<StepRewardRecord>> rewards) {
  if (group.empty()) throw PreconditionError("advantage group is empty");
  if (group.size() != rewards.size()) {
    throw PreconditionError("every trajectory in the group needs its reward records");
  }
  std::vector<double> totals;
  for (std::size_t i = 0; i < group.size(); ++i) {
    if (group[i].instruction_key != group[0].instruction_key) {
      throw PreconditionError("advantage group mixes instructions '" + group[0].instruction_key +
                              "' and '" + group[i].instruction_key + "'");
    }
    if (rewards[i].size() != group[i].steps.size()) {
      throw PreconditionError("reward records do not cover trajectory " + std::to_string(i));
    }
    for (const StepRewardRecord& r : rewards[i]) totals.push_back(r.r_total);
  }
  if (totals.empty()) throw PreconditionError("advantage group has no steps");

  AdvantageBatch batch;
  const double n = static_cast<double>(totals.size());
  batch.mean = kernels::sum(totals) / n;
  batch.std = std::sqrt(kernels::sum_squared_deviation(totals, batch.mean) / n);
  batch.degenerate = batch.std < kDegenerateStd;
  batch.advantages.reserve(group.size());
  for (const auto& records : rewards) {
    std::vector<double> adv(records.size(), 0.0);
    if (!batch.degenerate) {
      for (std::size_t t = 0; t < records.size(); ++t) {
        adv[t] = (records[t].r_total - batch.mean) / batch.std;
      }
    }
    batch.advantages.push_back(std::move(adv));
  }
  return batch;
}

// ---- surrogate ---------------------------------------------------------------

double clipped_term(double ratio, double advantage, double epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

SurrogateResult surrogate_and_gradient(const TabularPolicy& policy, const TabularPolicy& old_policy,
                                       std::span<const PolicySample> samples, double epsilon) {
  SurrogateResult result;
  if (samples.empty()) return result;
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  const double inv_temp = 1.0 / policy.temperature();
  std::vector<double> probs;
  for (const PolicySample& s : samples) {
    std::span<const double> logits = policy.logits_by_key(s.key);
    if (s.action >= logits.size()) {
      throw LookupError("action " + std::to_string(s.action) + " absent from policy entry '" +
                        s.key + "'");
    }
    probs.resize(logits.size());
    softmax(logits, policy.temperature(), probs);
    const double logp = std::log(probs[s.action]);
    const double ratio = std::exp(logp - old_policy.log_prob(s.key, s.action));
    const double unclipped = ratio * s.advantage;
    const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon) * s.advantage;
    result.objective += std::min(unclipped, clipped) * inv_n;
    if (clipped < unclipped || s.advantage == 0.0) continue;
    // d ratio / d logit_b = ratio * (1[b == a] - p_b) / temperature
    auto [it, inserted] = result.gradient.try_emplace(s.key, logits.size(), 0.0);
    std::span<double> g = it->second;
    const double c = s.advantage * ratio * inv_temp * inv_n;
    kernels::axpy(-c, probs, g);
    g[s.action] += c;
  }
  return result;
}

std::vector<PolicySample> make_samples(const Environment& env, const Trajectory& trajectory,
                                       std::span<const double> advantages) {
  if (advantages.size() != trajectory.steps.size()) {
    throw PreconditionError("advantages do not cover the trajectory");
  }
  std::vector<PolicySample> out;
  out.reserve(trajectory.steps.size());
  for (std::size_t t = 0; t < trajectory.steps.size(); ++t) {
    const Step& step = trajectory.steps[t];
    std::span<const ActionRecord> menu = env.menu(step.observation.screen_id);
    std::size_t index = menu.size();
    for (std::size_t i = 0; i < menu.size(); ++i) {
      if (menu[i].raw_text == step.action.raw_text) {
        index = i;
        break;
      }
    }
    if (index == menu.size()) {
      throw LookupError("action '" + step.action.raw_text + "' is not offered on screen '" +
                        step.observation.screen_id + "'");
    }
    out.push_back({TabularPolicy::key(step.observation.screen_id, trajectory.instruction_key),
                   index, advantages[t]});
  }
  return out;
}

}  // namespace mrl
