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

#include "mrl/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <memory>
#include <numeric>
#include <thread>

#include "mrl/embedding.hpp"
#include "mrl/error.hpp"
#include "mrl/kernels/vector_ops.hpp"
#include "mrl/matching.hpp"
#include "mrl/process_reward.hpp"

namespace mrl {

using nlohmann::json;

namespace {

constexpr std::uint64_t kRunStream = 0x52554e;
constexpr std::uint64_t kRolloutStream = 0x524f4c4c;
constexpr std::uint64_t kEvalStream = 0x4556414c;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// Runs fn(i) for i in [0, n) on up to `workers` threads; rethrows the first
// failure after all threads join.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(n);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<TaskSpec> capped_tasks(const Environment& env, int max_steps) {
  std::vector<TaskSpec> tasks = env.tasks();
  for (TaskSpec& t : tasks) t.horizon = std::min(t.horizon, max_steps);
  return tasks;
}

double initialization_rate(const Environment& env, const MilestoneStore& store) {
  std::size_t covered = 0;
  for (const TaskSpec& t : env.tasks()) {
    if (store.contains(t.instruction.key)) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(env.tasks().size());
}

}  // namespace

std::string_view reward_mode_name(RewardMode mode) {
  switch (mode) {
    case RewardMode::kAdmire:
      return "admire";
    case RewardMode::kOutcomeOnly:
      return "outcome";
    case RewardMode::kProcessStub:
      return "process";
  }
  return "?";
}

RewardMode parse_reward_mode(std::string_view text) {
  if (text == "admire") return RewardMode::kAdmire;
  if (text == "outcome" || text == "outcome_only") return RewardMode::kOutcomeOnly;
  if (text == "process" || text == "process_stub") return RewardMode::kProcessStub;
  throw ConfigError("unknown reward mode '" + std::string(text) +
                    "' (expected admire, outcome or process)");
}

void TrainConfig::validate() const {
  if (group_size < 2) throw ConfigError("group_size must be >= 2");
  if (tasks_per_iteration < 1) throw ConfigError("tasks_per_iteration must be >= 1");
  if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) throw ConfigError("clip_epsilon must lie in (0,1)");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (update_epochs < 1) throw ConfigError("update_epochs must be >= 1");
  if (minibatch_size < 1) throw ConfigError("minibatch_size must be >= 1");
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
  if (eval_rollouts < 0) throw ConfigError("eval_rollouts must be >= 0");
  if (workers < 0) throw ConfigError("workers must be >= 0");
}

json to_json(const TrainConfig& c) {
  return {{"group_size", c.group_size},       {"tasks_per_iteration", c.tasks_per_iteration},
          {"max_steps", c.max_steps},         {"clip_epsilon", c.clip_epsilon},
          {"learning_rate", c.learning_rate}, {"update_epochs", c.update_epochs},
          {"minibatch_size", c.minibatch_size}, {"iterations", c.iterations},
          {"seed", c.seed},                   {"temperature", c.temperature},
          {"eval_rollouts", c.eval_rollouts}, {"workers", c.workers}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  try {
    c.group_size = j.value("group_size", c.group_size);
    c.tasks_per_iteration = j.value("tasks_per_iteration", c.tasks_per_iteration);
    c.max_steps = j.value("max_steps", c.max_steps);
    c.clip_epsilon = j.value("clip_epsilon", c.clip_epsilon);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.update_epochs = j.value("update_epochs", c.update_epochs);
    c.minibatch_size = j.value("minibatch_size", c.minibatch_size);
    c.iterations = j.value("iterations", c.iterations);
    c.seed = j.value("seed", c.seed);
    c.temperature = j.value("temperature", c.temperature);
    c.eval_rollouts = j.value("eval_rollouts", c.eval_rollouts);
    c.workers = j.value("workers", c.workers);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad train config: ") + e.what());
  }
  c.validate();
  return c;
}

EvalSummary evaluate(const Environment& env, const RolloutPolicy& policy, int rollouts_per_task,
                     std::uint64_t seed, int max_steps, int workers) {
  if (rollouts_per_task < 1) throw ConfigError("evaluation needs at least one rollout per task");
  const std::vector<TaskSpec> tasks = capped_tasks(env, max_steps);
  const std::size_t per = static_cast<std::size_t>(rollouts_per_task);
  std::vector<int> outcomes(tasks.size() * per, 0);
  parallel_for(outcomes.size(), workers, [&](std::size_t i) {
    const std::size_t task = i / per;
    outcomes[i] = rollout(env, policy, tasks[task], derive_seed(seed, {task, i % per})).outcome;
  });

  EvalSummary summary;
  summary.rollouts_per_task = rollouts_per_task;
  std::map<std::string, std::pair<int, int>> tiers;
  int total = 0;
  for (std::size_t task = 0; task < tasks.size(); ++task) {
    const int wins = std::accumulate(outcomes.begin() + task * per,
                                     outcomes.begin() + (task + 1) * per, 0);
    total += wins;
    summary.by_task[tasks[task].instruction.key] = static_cast<double>(wins) / per;
    auto& [w, n] = tiers[std::string(difficulty_name(tasks[task].instruction.difficulty))];
    w += wins;
    n += rollouts_per_task;
  }
  for (const auto& [tier, wn] : tiers) summary.by_tier[tier] = static_cast<double>(wn.first) / wn.second;
  summary.overall = static_cast<double>(total) / static_cast<double>(outcomes.size());
  return summary;
}

TrainResult train(const Environment& env, MilestoneStore& store, AbstractionProvider& provider,
                  const RewardConfig& reward_config, const TrainConfig& config, RewardMode mode,
                  const TrainHooks& hooks) {
  reward_config.validate();
  config.validate();
  if (env.tasks().empty()) throw PreconditionError("environment has no tasks");

  TrainResult result{{}, TabularPolicy::for_environment(env, config.temperature), false, {}};
  const int workers = resolve_workers(config.workers);
  const std::vector<TaskSpec> tasks = capped_tasks(env, config.max_steps);
  const std::size_t n_tasks = tasks.size();
  const std::size_t per_iter =
      std::min<std::size_t>(static_cast<std::size_t>(config.tasks_per_iteration), n_tasks);
  const std::size_t B = static_cast<std::size_t>(config.group_size);
  Rng run_rng(derive_seed(config.seed, {kRunStream}));
  const auto embedder =
      std::make_shared<CachingEmbedder>(std::make_shared<HashedBagOfWordsEmbedder>());
  // Milestone embeddings per instruction, keyed by set version.
  std::map<std::string, std::pair<int, std::vector<EmbeddingVector>>> milestone_cache;
  std::vector<std::size_t> task_order(n_tasks);
  std::iota(task_order.begin(), task_order.end(), 0);

  std::optional<EvalSummary> initial_eval;
  int iteration = 0;
  try {
    if (config.eval_rollouts > 0) {
      initial_eval = evaluate(env, result.policy, config.eval_rollouts,
                              derive_seed(config.seed, {kEvalStream}), config.max_steps, workers);
    }
    for (iteration = 1; iteration <= config.iterations; ++iteration) {
      MetricsRow row;
      row.mode = std::string(reward_mode_name(mode));
      row.seed = config.seed;
      row.iteration = iteration;

      for (std::size_t i = 0; i < per_iter; ++i) {
        std::swap(task_order[i], task_order[i + run_rng.below(n_tasks - i)]);
      }
      const std::vector<std::size_t> sampled(task_order.begin(), task_order.begin() + per_iter);
      for (std::size_t t : sampled) row.tasks.push_back(tasks[t].instruction.key);

      // Rollouts against a frozen snapshot.
      const TabularPolicy snapshot = result.policy;
      IterationTrace trace;
      trace.iteration = iteration;
      trace.trajectories.resize(per_iter * B);
      auto phase_start = Clock::now();
      parallel_for(trace.trajectories.size(), workers, [&](std::size_t i) {
        const std::size_t task = sampled[i / B];
        trace.trajectories[i] =
            rollout(env, snapshot, tasks[task],
                    derive_seed(config.seed, {kRolloutStream, static_cast<std::uint64_t>(iteration),
                                              task, i % B}),
                    /*score=*/false);
      });
      row.wall.rollout = seconds_since(phase_start);

      // Outcome verification, milestone memory, step rewards, advantages.
      phase_start = Clock::now();
      row.lambda = mode == RewardMode::kAdmire        ? curriculum_lambda(reward_config, iteration)
                   : mode == RewardMode::kProcessStub ? kProcessRewardWeight
                                                      : 0.0;
      trace.rewards.resize(trace.trajectories.size());
      trace.advantages.resize(trace.trajectories.size());
      std::map<std::string, std::pair<int, int>> tier_wins;
      int wins = 0;
      double reward_sum = 0.0;
      std::size_t reward_steps = 0;
      for (std::size_t g = 0; g < per_iter; ++g) {
        const TaskSpec& task = tasks[sampled[g]];
        const std::span<Trajectory> group(trace.trajectories.data() + g * B, B);
        for (Trajectory& traj : group) wins += outcome_score(traj, env);

        const std::vector<EmbeddingVector>* milestone_embeddings = nullptr;
        if (mode == RewardMode::kAdmire) {
          if (const auto exemplar = select_exemplar(group)) {
            const UpdateReport report =
                store.maybe_update(group[*exemplar], task.instruction, provider);
            if (report.kind != UpdateKind::kUnchanged) {
              row.milestone_updates.push_back(report.instruction_key + ":" +
                                              std::string(update_kind_name(report.kind)) + ":" +
                                              std::to_string(report.version));
            }
          }
          if (const auto set = store.find(task.instruction.key)) {
            auto& [version, embedded] = milestone_cache[task.instruction.key];
            if (embedded.empty() || version != set->version) {
              version = set->version;
              embedded.clear();
              for (const Milestone& m : set->milestones) embedded.push_back(embedder->embed(m.text));
            }
            milestone_embeddings = &embedded;
            row.hit_counts[task.instruction.key].assign(set->size(), 0);
          }
        }

        for (std::size_t b = 0; b < B; ++b) {
          const Trajectory& traj = group[b];
          std::vector<StepRewardRecord>& records = trace.rewards[g * B + b];
          switch (mode) {
            case RewardMode::kAdmire: {
              std::optional<MatchTrace> match;
              if (milestone_embeddings) {
                match = match_embedded(
                    traj.steps.size(),
                    [&](std::size_t t) -> const EmbeddingVector& {
                      return embedder->embed_ref(traj.steps[t].action.description);
                    },
                    *milestone_embeddings, reward_config.delta);
                std::vector<int>& hits = row.hit_counts[task.instruction.key];
                for (int j = 0; j < match->k; ++j) ++hits[j];
              }
              records = total_rewards(traj, match, reward_config, iteration);
              break;
            }
            case RewardMode::kOutcomeOnly:
              records = total_rewards(traj, std::nullopt, reward_config, iteration);
              break;
            case RewardMode::kProcessStub:
              records = total_rewards_with_dense(traj, process_stub_reward(traj, env),
                                                 kProcessRewardWeight, reward_config);
              break;
          }
          for (const StepRewardRecord& r : records) reward_sum += r.r_total;
          reward_steps += records.size();
        }

        const AdvantageBatch batch = normalize_advantages(
            std::span<const Trajectory>(group),
            std::span<const std::vector<StepRewardRecord>>(trace.rewards.data() + g * B, B));
        if (batch.degenerate) ++row.degenerate_groups;
        for (std::size_t b = 0; b < B; ++b) trace.advantages[g * B + b] = batch.advantages[b];

        int group_wins = 0;
        for (const Trajectory& traj : group) group_wins += traj.outcome;
        auto& [tw, tn] = tier_wins[std::string(difficulty_name(task.instruction.difficulty))];
        tw += group_wins;
        tn += static_cast<int>(B);
      }
      row.wall.reward = seconds_since(phase_start);

      // Minibatched ascent on the clipped surrogate.
      phase_start = Clock::now();
      std::vector<PolicySample> samples;
      for (std::size_t i = 0; i < trace.trajectories.size(); ++i) {
        std::vector<PolicySample> s = make_samples(env, trace.trajectories[i], trace.advantages[i]);
        std::move(s.begin(), s.end(), std::back_inserter(samples));
      }
      std::vector<std::size_t> order(samples.size());
      std::iota(order.begin(), order.end(), 0);
      const std::size_t mb = static_cast<std::size_t>(config.minibatch_size);
      std::vector<PolicySample> chunk;
      for (int epoch = 0; epoch < config.update_epochs; ++epoch) {
        run_rng.shuffle(std::span<std::size_t>(order));
        double objective_sum = 0.0;
        std::size_t chunks = 0;
        for (std::size_t start = 0; start < order.size(); start += mb) {
          chunk.clear();
          for (std::size_t i = start; i < std::min(order.size(), start + mb); ++i) {
            chunk.push_back(samples[order[i]]);
          }
          const SurrogateResult sg =
              surrogate_and_gradient(result.policy, snapshot, chunk, config.clip_epsilon);
          for (const auto& [key, grad] : sg.gradient) {
            kernels::axpy(config.learning_rate, grad, result.policy.logits_by_key(key));
          }
          objective_sum += sg.objective;
          ++chunks;
        }
        row.objective = chunks ? objective_sum / static_cast<double>(chunks) : 0.0;
      }
      row.wall.update = seconds_since(phase_start);

      row.success_rate = static_cast<double>(wins) / static_cast<double>(trace.trajectories.size());
      for (const auto& [tier, wn] : tier_wins) {
        row.success_by_tier[tier] = static_cast<double>(wn.first) / wn.second;
      }
      row.milestone_initialization_rate = initialization_rate(env, store);
      for (const auto& [key, set] : store.entries()) row.milestone_versions[key] = set.version;
      row.mean_total_reward = reward_steps ? reward_sum / static_cast<double>(reward_steps) : 0.0;
      if (iteration == 1) row.initial_eval = initial_eval;
      result.history.push_back(std::move(row));
      if (hooks.on_iteration) hooks.on_iteration(trace, result.policy);
    }
    if (config.eval_rollouts > 0) {
      result.history.back().final_eval =
          evaluate(env, result.policy, config.eval_rollouts,
                   derive_seed(config.seed, {kEvalStream}), config.max_steps, workers);
    }
    result.completed = true;
  } catch (const std::exception& e) {
    result.error = e.what();
    MetricsRow failed;
    failed.mode = std::string(reward_mode_name(mode));
    failed.seed = config.seed;
    failed.iteration = iteration;
    failed.milestone_initialization_rate = initialization_rate(env, store);
    failed.error = e.what();
    result.history.push_back(std::move(failed));
  }
  return result;
}

}  // namespace mrl
