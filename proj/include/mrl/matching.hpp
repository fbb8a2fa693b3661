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

#ifndef MRL_MATCHING_HPP_
#define MRL_MATCHING_HPP_

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mrl/embedding.hpp"
#include "mrl/milestone_memory.hpp"

namespace mrl {

inline constexpr double kDefaultMatchThreshold = 0.75;

struct MatchStep {
  int t = 0;
  // Similarity against the milestone under the pointer; 0 once every
  // milestone has been hit.
  double similarity = 0.0;
  bool hit = false;
  int pointer_before = 0;  // 0-based index of the next uncompleted milestone
  int pointer_after = 0;   // == K once all milestones are done

  // Milestone reward for this step: the similarity on a hit, else 0.
  double reward() const { return hit ? similarity : 0.0; }
  bool operator==(const MatchStep&) const = default;
};

struct MatchTrace {
  std::vector<MatchStep> steps;
  int k = 0;  // milestones hit
  int K = 0;  // milestones in the set
  std::vector<int> hit_steps;

  bool operator==(const MatchTrace&) const = default;
};

// Sequential matching: each action is compared only with the next
// uncompleted milestone; a strict `similarity > delta` hit advances the
// pointer by one. After the last milestone is hit nothing else can hit.
// Throws ConfigError for delta outside (0,1) and PreconditionError for an
// empty milestone list.
MatchTrace match_trajectory(std::span<const std::string> actions,
                            std::span<const EmbeddingVector> milestone_embeddings,
                            double delta, const Embedder& embedder);

// Same protocol over pre-embedded actions. `action_embedding(t)` is called
// only while milestones remain, in step order.
MatchTrace match_embedded(std::size_t steps,
                          const std::function<const EmbeddingVector&(std::size_t)>& action_embedding,
                          std::span<const EmbeddingVector> milestone_embeddings, double delta);

MatchTrace match_trajectory(std::span<const std::string> actions, const MilestoneSet& milestones,
                            double delta, const Embedder& embedder);

// Holds the embeddings of one milestone set so repeated matching only
// embeds the actions.
class MilestoneMatcher {
 public:
  MilestoneMatcher(const MilestoneSet& milestones, double delta, const Embedder& embedder);
  MatchTrace match(std::span<const std::string> actions) const;
  MatchTrace match(const Trajectory& trajectory) const;

 private:
  std::vector<EmbeddingVector> milestone_embeddings_;
  double delta_;
  const Embedder& embedder_;
};

// ---- threshold calibration --------------------------------------------------

struct LabeledPair {
  std::string milestone;
  std::string action;
  bool matched = false;
};

struct CalibrationRow {
  double delta = 0.0;
  double accuracy = 0.0;
  int tp = 0;
  int tn = 0;
  int fp = 0;
  int fn = 0;
};

// For each delta: predicted match iff cosine(embed(milestone), embed(action))
// > delta. Throws ConfigError for an empty grid or out-of-range value,
// PreconditionError for no pairs.
std::vector<CalibrationRow> calibrate_delta(std::span<const LabeledPair> pairs,
                                            std::span<const double> grid,
                                            const Embedder& embedder);

// "start:stop:step", inclusive of stop. Values are rounded to 1e-9 so that
// 0.55 + 2*0.05 prints and compares as 0.65.
std::vector<double> parse_grid(std::string_view text);

// JSONL with {"milestone", "action", "label": "matched"|"unmatched"}.
std::vector<LabeledPair> read_labeled_pairs(const std::filesystem::path& path);

}  // namespace mrl

#endif  // MRL_MATCHING_HPP_
