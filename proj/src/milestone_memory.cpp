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

#include "mrl/milestone_memory.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "mrl/error.hpp"
#include "mrl/synth_env.hpp"

namespace mrl {

using nlohmann::json;

bool placeholders_well_bracketed(std::string_view text) {
  bool open = false;
  for (char c : text) {
    if (c == '<') {
      if (open) return false;
      open = true;
    } else if (c == '>') {
      if (!open) return false;
      open = false;
    }
  }
  return !open;
}

std::vector<std::string> MilestoneSet::texts() const {
  std::vector<std::string> out;
  out.reserve(milestones.size());
  for (const Milestone& m : milestones) out.push_back(m.text);
  return out;
}

void MilestoneSet::validate() const {
  if (milestones.empty()) {
    throw AbstractionError("milestone set for '" + instruction_key + "' is empty");
  }
  for (const Milestone& m : milestones) {
    if (m.text.empty()) throw AbstractionError("empty milestone text");
    if (!placeholders_well_bracketed(m.text)) {
      throw AbstractionError("badly bracketed placeholder in '" + m.text + "'");
    }
  }
  if (version < 0) throw AbstractionError("negative milestone version");
  if (source_length < static_cast<int>(milestones.size())) {
    throw AbstractionError("source_length " + std::to_string(source_length) +
                           " is shorter than the milestone count " +
                           std::to_string(milestones.size()));
  }
}

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

void replace_all(std::string& text, const std::string& needle, const std::string& with,
                 bool word_boundaries) {
  if (needle.empty()) return;
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    const std::size_t end = pos + needle.size();
    const bool left_ok = !word_boundaries || pos == 0 || !is_word_char(text[pos - 1]);
    const bool right_ok = !word_boundaries || end >= text.size() || !is_word_char(text[end]);
    if (left_ok && right_ok) {
      text.replace(pos, needle.size(), with);
      pos += with.size();
    } else {
      pos = end;
    }
  }
}

}  // namespace

std::string generalize_description(std::string_view description,
                                   std::span<const std::string> parameters) {
  std::vector<std::string> params(parameters.begin(), parameters.end());
  // Longest first so "Bobby" is not half-replaced by "Bob".
  std::stable_sort(params.begin(), params.end(),
                   [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
  std::string out(description);
  for (const std::string& p : params) {
    replace_all(out, "'" + p + "'", "<Value>", false);
    replace_all(out, "\"" + p + "\"", "<Value>", false);
    replace_all(out, p, "<Value>", true);
  }
  return out;
}

MilestoneSet reference_initialize(const Trajectory& trajectory, const Instruction& goal,
                                  const std::vector<bool>& transition_labels,
                                  std::span<const std::string> parameters) {
  if (transition_labels.size() != trajectory.steps.size()) {
    throw AbstractionError("transition labels do not cover the trajectory");
  }
  MilestoneSet set;
  set.instruction_key = goal.key;
  set.source_length = trajectory.terminal_step();
  for (std::size_t t = 0; t < trajectory.steps.size(); ++t) {
    if (!transition_labels[t]) continue;
    set.milestones.push_back(
        {generalize_description(trajectory.steps[t].action.description, parameters)});
  }
  if (set.milestones.empty()) {
    throw AbstractionError("trajectory for '" + goal.key + "' has no state-changing steps");
  }
  set.validate();
  return set;
}

MilestoneSet ReferenceProvider::initialize(const Trajectory& trajectory,
                                           const Instruction& goal) {
  const TaskSpec& task = env_.task(goal.key);
  return reference_initialize(trajectory, goal, env_.transition_labels(trajectory),
                              task.parameters);
}

std::optional<MilestoneSet> ReferenceProvider::refine(const Trajectory& trajectory,
                                                      const MilestoneSet& current,
                                                      const Instruction& goal) {
  if (trajectory.terminal_step() >= current.source_length) return std::nullopt;
  return initialize(trajectory, goal);
}

std::string_view update_kind_name(UpdateKind kind) {
  switch (kind) {
    case UpdateKind::kInitialized:
      return "initialized";
    case UpdateKind::kRefined:
      return "refined";
    case UpdateKind::kUnchanged:
      return "unchanged";
  }
  return "unchanged";
}

std::optional<std::size_t> select_exemplar(std::span<const Trajectory> batch) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].outcome != 1) continue;
    if (!best || batch[i].terminal_step() < batch[*best].terminal_step()) best = i;
  }
  return best;
}

// ---- store -------------------------------------------------------------------

MilestoneStore::MilestoneStore(const MilestoneStore& other) {
  std::lock_guard<std::mutex> lock(other.mu_);
  sets_ = other.sets_;
}

MilestoneStore& MilestoneStore::operator=(const MilestoneStore& other) {
  if (this == &other) return *this;
  std::map<std::string, MilestoneSet, std::less<>> copy;
  {
    std::lock_guard<std::mutex> lock(other.mu_);
    copy = other.sets_;
  }
  std::lock_guard<std::mutex> lock(mu_);
  sets_ = std::move(copy);
  return *this;
}

std::optional<MilestoneSet> MilestoneStore::find(std::string_view key) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = sets_.find(key);
  if (it == sets_.end()) return std::nullopt;
  return it->second;
}

bool MilestoneStore::contains(std::string_view key) const {
  std::lock_guard<std::mutex> lock(mu_);
  return sets_.find(key) != sets_.end();
}

std::size_t MilestoneStore::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return sets_.size();
}

std::map<std::string, MilestoneSet> MilestoneStore::entries() const {
  std::lock_guard<std::mutex> lock(mu_);
  return {sets_.begin(), sets_.end()};
}

UpdateReport MilestoneStore::maybe_update(const Trajectory& trajectory, const Instruction& goal,
                                          AbstractionProvider& provider) {
  if (trajectory.outcome != 1) {
    throw PreconditionError("milestones are only distilled from successful trajectories");
  }
  if (trajectory.instruction_key != goal.key) {
    throw PreconditionError("trajectory instruction '" + trajectory.instruction_key +
                            "' does not match goal '" + goal.key + "'");
  }
  // The provider runs outside the lock; the store is only touched once a
  // valid result exists, so provider failures leave it as it was.
  const std::optional<MilestoneSet> current = find(goal.key);
  UpdateReport report{goal.key, UpdateKind::kUnchanged, current ? current->version : 0};
  if (!current) {
    MilestoneSet fresh = provider.initialize(trajectory, goal);
    fresh.instruction_key = goal.key;
    fresh.version = 0;
    fresh.validate();
    std::lock_guard<std::mutex> lock(mu_);
    sets_.insert_or_assign(goal.key, fresh);
    report.kind = UpdateKind::kInitialized;
    report.version = 0;
    return report;
  }
  std::optional<MilestoneSet> refined = provider.refine(trajectory, *current, goal);
  if (!refined) return report;
  refined->instruction_key = goal.key;
  refined->version = current->version + 1;
  refined->validate();
  std::lock_guard<std::mutex> lock(mu_);
  sets_.insert_or_assign(goal.key, *refined);
  report.kind = UpdateKind::kRefined;
  report.version = refined->version;
  return report;
}

json MilestoneStore::to_json() const {
  json entries = json::object();
  for (const auto& [key, set] : this->entries()) {
    entries[key] = {{"version", set.version},
                    {"source_length", set.source_length},
                    {"milestones", set.texts()}};
  }
  return {{"schema_version", kStoreSchemaVersion}, {"entries", std::move(entries)}};
}

MilestoneStore MilestoneStore::from_json(const json& j) {
  MilestoneStore store;
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kStoreSchemaVersion) {
      throw VersionError("unsupported milestone store schema_version " + std::to_string(version));
    }
    for (const auto& [key, e] : j.at("entries").items()) {
      MilestoneSet set;
      set.instruction_key = key;
      set.version = e.at("version").get<int>();
      set.source_length = e.at("source_length").get<int>();
      for (const auto& text : e.at("milestones")) set.milestones.push_back({text.get<std::string>()});
      set.validate();
      store.sets_.emplace(key, std::move(set));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed milestone store: ") + e.what());
  }
  return store;
}

void MilestoneStore::save(const std::filesystem::path& path) const {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << to_json().dump(2) << '\n';
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

MilestoneStore MilestoneStore::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON in milestone store: ") + e.what());
  }
}

}  // namespace mrl
