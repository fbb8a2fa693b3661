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

#include "mrl/trajectory.hpp"

#include <fstream>
#include <sstream>

#include "mrl/error.hpp"

namespace mrl {

using nlohmann::json;

std::string_view difficulty_name(Difficulty d) {
  switch (d) {
    case Difficulty::kEasy:
      return "easy";
    case Difficulty::kMedium:
      return "medium";
    case Difficulty::kHard:
      return "hard";
  }
  return "easy";
}

Difficulty parse_difficulty(std::string_view name) {
  if (name == "easy") return Difficulty::kEasy;
  if (name == "medium") return Difficulty::kMedium;
  if (name == "hard") return Difficulty::kHard;
  throw ParseError("unknown difficulty tier '" + std::string(name) + "'");
}

std::vector<std::string> Trajectory::action_descriptions() const {
  std::vector<std::string> out;
  out.reserve(steps.size());
  for (const Step& s : steps) out.push_back(s.action.description);
  return out;
}

void validate(const Trajectory& trajectory) {
  if (trajectory.instruction_key.empty()) {
    throw ParseError("trajectory has empty instruction_key");
  }
  if (trajectory.steps.empty()) throw ParseError("trajectory has no steps");
  if (trajectory.outcome != 0 && trajectory.outcome != 1) {
    throw ParseError("outcome must be 0 or 1");
  }
  for (std::size_t i = 0; i < trajectory.steps.size(); ++i) {
    const Step& s = trajectory.steps[i];
    if (s.index != static_cast<int>(i)) {
      throw ParseError("step indices must be contiguous from 0 (got " +
                       std::to_string(s.index) + " at position " +
                       std::to_string(i) + ")");
    }
    if (s.action.syntax_valid && s.action.description.empty()) {
      throw ParseError("valid action at step " + std::to_string(i) +
                       " has empty description");
    }
  }
}

int outcome_score(Trajectory& trajectory, const SuccessChecker& checker) {
  trajectory.outcome = checker.accepts(trajectory) ? 1 : 0;
  return trajectory.outcome;
}

namespace {

json features_to_json(const std::map<std::string, FeatureValue>& features) {
  json j = json::object();
  for (const auto& [name, value] : features) {
    if (const double* d = std::get_if<double>(&value)) {
      j[name] = *d;
    } else {
      j[name] = std::get<std::string>(value);
    }
  }
  return j;
}

std::map<std::string, FeatureValue> features_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("'features' must be an object");
  std::map<std::string, FeatureValue> out;
  for (const auto& [name, value] : j.items()) {
    if (value.is_number()) {
      out.emplace(name, value.get<double>());
    } else if (value.is_string()) {
      out.emplace(name, value.get<std::string>());
    } else {
      throw ParseError("feature '" + name + "' must be a number or string");
    }
  }
  return out;
}

template <typename T>
T require(const json& j, const char* field) {
  if (!j.contains(field)) {
    throw ParseError(std::string("missing field '") + field + "'");
  }
  try {
    return j.at(field).get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("field '") + field + "' has the wrong type");
  }
}

}  // namespace

json to_json(const Trajectory& trajectory) {
  json steps = json::array();
  for (const Step& s : trajectory.steps) {
    steps.push_back({{"t", s.index},
                     {"screen_id", s.observation.screen_id},
                     {"features", features_to_json(s.observation.features)},
                     {"action_raw", s.action.raw_text},
                     {"action_desc", s.action.description},
                     {"syntax_valid", s.action.syntax_valid}});
  }
  return {{"schema_version", kTrajectorySchemaVersion},
          {"instruction_key", trajectory.instruction_key},
          {"outcome", trajectory.outcome},
          {"steps", std::move(steps)}};
}

Trajectory trajectory_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("trajectory record must be an object");
  const int version = require<int>(j, "schema_version");
  if (version != kTrajectorySchemaVersion) {
    throw VersionError("unsupported trajectory schema_version " +
                       std::to_string(version));
  }
  Trajectory t;
  t.instruction_key = require<std::string>(j, "instruction_key");
  t.outcome = require<int>(j, "outcome");
  if (!j.contains("steps") || !j["steps"].is_array()) {
    throw ParseError("'steps' must be an array");
  }
  for (const json& s : j["steps"]) {
    Step step;
    step.index = require<int>(s, "t");
    step.observation.screen_id = require<std::string>(s, "screen_id");
    step.observation.features =
        features_from_json(s.contains("features") ? s["features"] : json::object());
    step.action.raw_text = require<std::string>(s, "action_raw");
    step.action.description = require<std::string>(s, "action_desc");
    step.action.syntax_valid = require<bool>(s, "syntax_valid");
    t.steps.push_back(std::move(step));
  }
  validate(t);
  return t;
}

namespace {

void write_lines(const std::vector<Trajectory>& trajectories,
                 const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  for (const Trajectory& t : trajectories) out << to_json(t).dump() << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

void write_trajectory_log(const std::vector<Trajectory>& trajectories,
                          const std::filesystem::path& path) {
  write_lines(trajectories, path, std::ios::out | std::ios::trunc);
}

void append_trajectory_log(const std::vector<Trajectory>& trajectories,
                           const std::filesystem::path& path) {
  write_lines(trajectories, path, std::ios::out | std::ios::app);
}

std::vector<Trajectory> read_trajectory_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<Trajectory> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(trajectory_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    } catch (const VersionError& e) {
      throw VersionError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

}  // namespace mrl
