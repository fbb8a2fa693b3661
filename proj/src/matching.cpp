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

#include "mrl/matching.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "mrl/error.hpp"

namespace mrl {

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("match threshold must lie in (0,1), got " + std::to_string(delta));
  }
}

std::vector<EmbeddingVector> embed_all(const MilestoneSet& milestones, const Embedder& embedder) {
  std::vector<EmbeddingVector> out;
  out.reserve(milestones.size());
  for (const Milestone& m : milestones.milestones) out.push_back(embedder.embed(m.text));
  return out;
}

}  // namespace

MatchTrace match_embedded(std::size_t steps,
                          const std::function<const EmbeddingVector&(std::size_t)>& action_embedding,
                          std::span<const EmbeddingVector> milestone_embeddings, double delta) {
  check_delta(delta);
  if (milestone_embeddings.empty()) {
    throw PreconditionError("cannot match against an empty milestone set");
  }
  MatchTrace trace;
  trace.K = static_cast<int>(milestone_embeddings.size());
  trace.steps.reserve(steps);
  int pointer = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    MatchStep step;
    step.t = static_cast<int>(t);
    step.pointer_before = pointer;
    if (pointer < trace.K) {
      step.similarity = cosine(action_embedding(t), milestone_embeddings[pointer]);
      if (step.similarity > delta) {
        step.hit = true;
        ++pointer;
        ++trace.k;
        trace.hit_steps.push_back(step.t);
      }
    }
    step.pointer_after = pointer;
    trace.steps.push_back(step);
  }
  return trace;
}

MatchTrace match_trajectory(std::span<const std::string> actions,
                            std::span<const EmbeddingVector> milestone_embeddings,
                            double delta, const Embedder& embedder) {
  EmbeddingVector current;
  return match_embedded(
      actions.size(),
      [&](std::size_t t) -> const EmbeddingVector& {
        current = embedder.embed(actions[t]);
        return current;
      },
      milestone_embeddings, delta);
}

MatchTrace match_trajectory(std::span<const std::string> actions, const MilestoneSet& milestones,
                            double delta, const Embedder& embedder) {
  const std::vector<EmbeddingVector> embedded = embed_all(milestones, embedder);
  return match_trajectory(actions, embedded, delta, embedder);
}

MilestoneMatcher::MilestoneMatcher(const MilestoneSet& milestones, double delta,
                                   const Embedder& embedder)
    : milestone_embeddings_(embed_all(milestones, embedder)), delta_(delta), embedder_(embedder) {
  check_delta(delta);
}

MatchTrace MilestoneMatcher::match(std::span<const std::string> actions) const {
  return match_trajectory(actions, milestone_embeddings_, delta_, embedder_);
}

MatchTrace MilestoneMatcher::match(const Trajectory& trajectory) const {
  const std::vector<std::string> actions = trajectory.action_descriptions();
  return match(actions);
}

std::vector<CalibrationRow> calibrate_delta(std::span<const LabeledPair> pairs,
                                            std::span<const double> grid,
                                            const Embedder& embedder) {
  if (grid.empty()) throw ConfigError("calibration grid is empty");
  if (pairs.empty()) throw PreconditionError("calibration needs at least one labeled pair");
  for (double d : grid) check_delta(d);
  std::vector<double> sims;
  sims.reserve(pairs.size());
  for (const LabeledPair& p : pairs) {
    sims.push_back(cosine(embedder.embed(p.milestone), embedder.embed(p.action)));
  }
  std::vector<CalibrationRow> rows;
  for (double d : grid) {
    CalibrationRow row;
    row.delta = d;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const bool predicted = sims[i] > d;
      if (predicted && pairs[i].matched) ++row.tp;
      if (!predicted && !pairs[i].matched) ++row.tn;
      if (predicted && !pairs[i].matched) ++row.fp;
      if (!predicted && pairs[i].matched) ++row.fn;
    }
    row.accuracy = static_cast<double>(row.tp + row.tn) / static_cast<double>(pairs.size());
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> parse_grid(std::string_view text) {
  std::vector<double> parts;
  std::string s(text);
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = s.find(':', start);
    const std::string piece = s.substr(start, colon == std::string::npos ? std::string::npos
                                                                          : colon - start);
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(piece, &used));
      if (used != piece.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError("bad grid component '" + piece + "'");
    }
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3) throw ParseError("grid must be 'start:stop:step' or a single value");
  const double lo = parts[0], hi = parts[1], step = parts[2];
  if (!(step > 0.0) || hi < lo) throw ParseError("grid needs step > 0 and stop >= start");
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double v = std::round((lo + i * step) * 1e9) / 1e9;
    if (v > hi + 1e-9) break;
    grid.push_back(v);
  }
  return grid;
}

std::vector<LabeledPair> read_labeled_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<LabeledPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      LabeledPair p;
      p.milestone = j.at("milestone").get<std::string>();
      p.action = j.at("action").get<std::string>();
      const std::string label = j.at("label").get<std::string>();
      if (label == "matched") {
        p.matched = true;
      } else if (label != "unmatched") {
        throw ParseError("label must be 'matched' or 'unmatched'", line_no);
      }
      pairs.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return pairs;
}

}  // namespace mrl
