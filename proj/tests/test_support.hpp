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

// Shared fixtures for the unit tests.

#ifndef MRL_TESTS_TEST_SUPPORT_HPP_
#define MRL_TESTS_TEST_SUPPORT_HPP_

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include "mrl/synth_env.hpp"

namespace testing {

// Home --click("search")--> Search --input("Bob", "note name")--> Saved.
// Home also offers a scroll no-op and an invalid action.
inline mrl::Environment tiny_env() {
  using namespace mrl;
  std::map<std::string, Screen> screens;
  screens["Home"] = Screen{"Home", {"click(\"search\")", "scroll(down)", "click(search)"}, {{"items", 3.0}}};
  screens["Search"] = Screen{"Search", {"input(\"Bob\", \"note name\")", "back()", "scroll(up)"}, {{"title", std::string("Search")}}};
  screens["Saved"] = Screen{"Saved", {"back()"}, {}};
  Environment::EdgeTable edges;
  edges["Home"]["click(\"search\")"] = Edge{"Search", {{"search_opened"}, {}}};
  edges["Search"]["input(\"Bob\", \"note name\")"] = Edge{"Saved", {{"name_entered"}, {}}};
  edges["Search"]["back()"] = Edge{"Home", {}};
  edges["Saved"]["back()"] = Edge{"Search", {}};
  TaskSpec task;
  task.instruction = {"note_bob", "Create a note named Bob", Difficulty::kEasy};
  task.start_screen = "Home";
  task.goal_facts = {"name_entered"};
  task.horizon = 6;
  task.shortest_length = 2;
  task.transition_steps = {"click(\"search\")", "input(\"Bob\", \"note name\")"};
  task.parameters = {"Bob"};
  TaskSpec other = task;
  other.instruction = {"open_search", "Open the search screen", Difficulty::kEasy};
  other.goal_facts = {"search_opened"};
  other.shortest_length = 1;
  other.transition_steps = {"click(\"search\")"};
  other.parameters = {};
  return Environment(std::move(screens), std::move(edges), {task, other}, ActionGrammar::gui_default());
}

// Plays a fixed list of raw actions from the task start.
inline mrl::Trajectory scripted(const mrl::Environment& env, const std::string& key,
                                const std::vector<std::string>& actions) {
  const mrl::TaskSpec& task = env.task(key);
  mrl::Trajectory tr;
  tr.instruction_key = key;
  mrl::LatentState s = env.initial_state(task);
  for (std::size_t t = 0; t < actions.size(); ++t) {
    tr.steps.push_back({static_cast<int>(t), env.observe(s), env.grammar().describe(actions[t])});
    s = env.step(s, actions[t]).state;
  }
  mrl::outcome_score(tr, env);
  return tr;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mrl_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace testing

#endif  // MRL_TESTS_TEST_SUPPORT_HPP_
