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

// Per-instruction milestone memory. Milestones are short action templates
// distilled from successful trajectories; the store keeps one versioned set
// per instruction and evolves it when a better trajectory shows up.

#ifndef MRL_MILESTONE_MEMORY_HPP_
#define MRL_MILESTONE_MEMORY_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mrl/trajectory.hpp"

namespace mrl {

class Environment;

// True when every '<' is closed by a '>' before the next '<' and no '>'
// appears unopened.
bool placeholders_well_bracketed(std::string_view text);

struct Milestone {
  std::string text;

  bool operator==(const Milestone&) const = default;
};

struct MilestoneSet {
  std::string instruction_key;
  std::vector<Milestone> milestones;
  int version = 0;
  int source_length = 0;  // steps in the trajectory this version came from

  std::size_t size() const { return milestones.size(); }
  std::vector<std::string> texts() const;
  // Throws AbstractionError when an invariant is violated.
  void validate() const;

  bool operator==(const MilestoneSet&) const = default;
};

// The abstraction function that turns a successful trajectory into
// milestones. Implementations may be rule-based or backed by a model.
class AbstractionProvider {
 public:
  virtual ~AbstractionProvider() = default;
  virtual MilestoneSet initialize(const Trajectory& trajectory, const Instruction& goal) = 0;
  // nullopt means "keep the current set".
  virtual std::optional<MilestoneSet> refine(const Trajectory& trajectory,
                                             const MilestoneSet& current,
                                             const Instruction& goal) = 0;
};

// Replaces task parameter values with <Value>. Quoted occurrences ('Bob')
// lose their quotes; bare occurrences are replaced on word boundaries.
std::string generalize_description(std::string_view description,
                                   std::span<const std::string> parameters);

// Milestones are the generalized descriptions of the labeled steps, in
// order. Throws AbstractionError when no step is labeled.
MilestoneSet reference_initialize(const Trajectory& trajectory, const Instruction& goal,
                                  const std::vector<bool>& transition_labels,
                                  std::span<const std::string> parameters);

// Rule-based provider backed by the simulator's transition labels.
// Refinement regenerates from the new trajectory iff it is strictly shorter
// than the current set's source trajectory.
class ReferenceProvider final : public AbstractionProvider {
 public:
  explicit ReferenceProvider(const Environment& env) : env_(env) {}
  MilestoneSet initialize(const Trajectory& trajectory, const Instruction& goal) override;
  std::optional<MilestoneSet> refine(const Trajectory& trajectory, const MilestoneSet& current,
                                     const Instruction& goal) override;

 private:
  const Environment& env_;
};

enum class UpdateKind { kInitialized, kRefined, kUnchanged };
std::string_view update_kind_name(UpdateKind kind);

struct UpdateReport {
  std::string instruction_key;
  UpdateKind kind = UpdateKind::kUnchanged;
  int version = 0;
};

// Shortest successful trajectory, ties to the earliest; nullopt if none.
std::optional<std::size_t> select_exemplar(std::span<const Trajectory> batch);

inline constexpr int kStoreSchemaVersion = 1;

class MilestoneStore {
 public:
  MilestoneStore() = default;
  MilestoneStore(const MilestoneStore& other);
  MilestoneStore& operator=(const MilestoneStore& other);

  std::optional<MilestoneSet> find(std::string_view key) const;
  bool contains(std::string_view key) const;
  std::size_t size() const;
  std::map<std::string, MilestoneSet> entries() const;

  // Initializes or refines the instruction's set from a successful
  // trajectory. Throws PreconditionError for failed trajectories; provider
  // errors propagate and leave the store untouched.
  UpdateReport maybe_update(const Trajectory& trajectory, const Instruction& goal,
                            AbstractionProvider& provider);

  nlohmann::json to_json() const;
  static MilestoneStore from_json(const nlohmann::json& j);
  // Writes to a temporary sibling and renames over `path`.
  void save(const std::filesystem::path& path) const;
  static MilestoneStore load(const std::filesystem::path& path);

  bool operator==(const MilestoneStore& other) const { return entries() == other.entries(); }

 private:
  mutable std::mutex mu_;
  std::map<std::string, MilestoneSet, std::less<>> sets_;
};

}  // namespace mrl

#endif  // MRL_MILESTONE_MEMORY_HPP_
