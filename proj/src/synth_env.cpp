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

#include "mrl/synth_env.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <sstream>

#include "mrl/embedding.hpp"
#include "mrl/error.hpp"
#include "mrl/milestone_memory.hpp"

namespace mrl {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxEnumeratedStates = 200000;

LatentState apply(const LatentState& state, const Edge& edge) {
  LatentState next{edge.to, state.facts};
  for (const std::string& f : edge.delta.remove) next.facts.erase(f);
  for (const std::string& f : edge.delta.add) next.facts.insert(f);
  return next;
}

}  // namespace

// ---- Environment -------------------------------------------------------------

Environment::Environment(std::map<std::string, Screen> screens, EdgeTable edges,
                         std::vector<TaskSpec> tasks, ActionGrammar grammar)
    : screens_(std::move(screens)),
      edges_(std::move(edges)),
      tasks_(std::move(tasks)),
      grammar_(std::move(grammar)) {
  validate();
  for (const auto& [id, screen] : screens_) {
    std::vector<ActionRecord> records;
    records.reserve(screen.menu.size());
    for (const std::string& raw : screen.menu) records.push_back(grammar_.describe(raw));
    menus_.emplace(id, std::move(records));
  }
  index_tasks();
}

void Environment::validate() const {
  for (const auto& [id, screen] : screens_) {
    if (id != screen.id) throw ConfigError("screen key/id mismatch for '" + id + "'");
    if (screen.menu.empty()) throw ConfigError("screen '" + id + "' has an empty menu");
  }
  for (const auto& [from, by_action] : edges_) {
    if (!screens_.contains(from)) {
      throw ConfigError("edge from undeclared screen '" + from + "'");
    }
    for (const auto& [action, edge] : by_action) {
      if (!screens_.contains(edge.to)) {
        throw ConfigError("edge " + from + " --" + action + "--> undeclared screen '" +
                          edge.to + "'");
      }
      auto parsed = grammar_.parse(action);
      if (!parsed || parsed->canonical() != action) {
        throw ConfigError("edge action '" + action + "' is not in canonical grammar form");
      }
    }
  }
  std::set<std::string> keys;
  for (const TaskSpec& t : tasks_) {
    if (t.instruction.key.empty() || !keys.insert(t.instruction.key).second) {
      throw ConfigError("task keys must be nonempty and unique ('" + t.instruction.key + "')");
    }
    if (t.instruction.goal_text.empty()) {
      throw ConfigError("task '" + t.instruction.key + "' has empty goal text");
    }
    if (!screens_.contains(t.start_screen)) {
      throw ConfigError("task '" + t.instruction.key + "' starts on undeclared screen");
    }
    if (t.transition_steps.empty()) {
      throw ConfigError("task '" + t.instruction.key + "' has no transition steps");
    }
  }
}

void Environment::index_tasks() {
  distance_tables_.clear();
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    const TaskSpec& task = tasks_[i];
    task_index_.emplace(task.instruction.key, i);

    // Enumerate the reachable state graph, then run a reverse BFS from every
    // goal state.
    std::map<LatentState, std::vector<LatentState>> predecessors;
    std::set<LatentState> seen;
    std::deque<LatentState> frontier;
    const LatentState start = initial_state(task);
    seen.insert(start);
    frontier.push_back(start);
    while (!frontier.empty()) {
      LatentState s = std::move(frontier.front());
      frontier.pop_front();
      for (auto& [action, next] : successors(s)) {
        predecessors[next].push_back(s);
        if (seen.insert(next).second) {
          if (seen.size() > kMaxEnumeratedStates) {
            throw ConfigError("state space of task '" + task.instruction.key +
                              "' is too large to enumerate");
          }
          frontier.push_back(next);
        }
      }
    }
    std::map<LatentState, int> dist;
    for (const LatentState& s : seen) {
      if (goal_reached(task, s)) {
        dist.emplace(s, 0);
        frontier.push_back(s);
      }
    }
    while (!frontier.empty()) {
      LatentState s = std::move(frontier.front());
      frontier.pop_front();
      const int d = dist.at(s);
      auto it = predecessors.find(s);
      if (it == predecessors.end()) continue;
      for (const LatentState& p : it->second) {
        if (dist.emplace(p, d + 1).second) frontier.push_back(p);
      }
    }
    distance_tables_.push_back(std::move(dist));
  }
}

const TaskSpec& Environment::task(std::string_view key) const {
  auto it = task_index_.find(key);
  if (it == task_index_.end()) {
    throw LookupError("unknown instruction key '" + std::string(key) + "'");
  }
  return tasks_[it->second];
}

const Screen& Environment::screen(std::string_view id) const {
  auto it = screens_.find(std::string(id));
  if (it == screens_.end()) throw LookupError("unknown screen '" + std::string(id) + "'");
  return it->second;
}

std::span<const ActionRecord> Environment::menu(std::string_view screen_id) const {
  auto it = menus_.find(screen_id);
  if (it == menus_.end()) {
    throw LookupError("unknown screen '" + std::string(screen_id) + "'");
  }
  return it->second;
}

LatentState Environment::initial_state(const TaskSpec& task) const {
  return LatentState{task.start_screen, {}};
}

bool Environment::goal_reached(const TaskSpec& task, const LatentState& state) const {
  return std::all_of(task.goal_facts.begin(), task.goal_facts.end(),
                     [&](const std::string& f) { return state.facts.contains(f); });
}

Observation Environment::observe(const LatentState& state) const {
  return Observation{state.screen, screen(state.screen).features};
}

Environment::StepResult Environment::step(const LatentState& state,
                                          std::string_view raw) const {
  auto parsed = grammar_.parse(raw);
  if (parsed) {
    auto from = edges_.find(state.screen);
    if (from != edges_.end()) {
      auto edge = from->second.find(parsed->canonical());
      if (edge != from->second.end()) {
        LatentState next = apply(state, edge->second);
        Observation obs = observe(next);
        return {std::move(next), std::move(obs)};
      }
    }
  }
  return {state, observe(state)};
}

Environment::StepResult Environment::step(const LatentState& state,
                                          const ActionRecord& action) const {
  return step(state, action.raw_text);
}

std::vector<std::pair<std::string, LatentState>> Environment::successors(
    const LatentState& state) const {
  std::vector<std::pair<std::string, LatentState>> out;
  auto from = edges_.find(state.screen);
  if (from == edges_.end()) return out;
  for (const auto& [action, edge] : from->second) {
    out.emplace_back(action, apply(state, edge));
  }
  return out;
}

std::vector<LatentState> Environment::replay(const Trajectory& trajectory) const {
  const TaskSpec& t = task(trajectory.instruction_key);
  std::vector<LatentState> states;
  states.reserve(trajectory.steps.size() + 1);
  states.push_back(initial_state(t));
  for (const Step& s : trajectory.steps) {
    states.push_back(step(states.back(), s.action.raw_text).state);
  }
  return states;
}

bool Environment::accepts(const Trajectory& trajectory) const {
  const TaskSpec& t = task(trajectory.instruction_key);
  return goal_reached(t, replay(trajectory).back());
}

std::vector<bool> Environment::transition_labels(const Trajectory& trajectory) const {
  const std::vector<LatentState> states = replay(trajectory);
  const std::size_t n = trajectory.steps.size();
  std::vector<bool> labels(n, false);
  // A fact added at step t is key iff it is present from t+1 through the end.
  for (std::size_t t = 0; t < n; ++t) {
    for (const std::string& f : states[t + 1].facts) {
      if (states[t].facts.contains(f)) continue;
      bool survives = true;
      for (std::size_t u = t + 1; u <= n; ++u) {
        if (!states[u].facts.contains(f)) {
          survives = false;
          break;
        }
      }
      if (survives) {
        labels[t] = true;
        break;
      }
    }
  }
  return labels;
}

std::optional<int> Environment::distance_to_goal(const TaskSpec& task,
                                                 const LatentState& state) const {
  auto idx = task_index_.find(task.instruction.key);
  if (idx != task_index_.end()) {
    const auto& table = distance_tables_[idx->second];
    auto it = table.find(state);
    if (it != table.end()) return it->second;
  }
  // Not reachable from the task start: search forward from the state.
  std::set<LatentState> seen{state};
  std::deque<std::pair<LatentState, int>> frontier{{state, 0}};
  while (!frontier.empty()) {
    auto [s, d] = frontier.front();
    frontier.pop_front();
    if (goal_reached(task, s)) return d;
    for (auto& [action, next] : successors(s)) {
      if (seen.insert(next).second) frontier.emplace_back(next, d + 1);
    }
    if (seen.size() > kMaxEnumeratedStates) break;
  }
  return std::nullopt;
}

std::optional<std::vector<std::string>> Environment::shortest_solution(
    const TaskSpec& task) const {
  const LatentState start = initial_state(task);
  std::map<LatentState, std::pair<LatentState, std::string>> parent;
  std::set<LatentState> seen{start};
  std::deque<LatentState> frontier{start};
  while (!frontier.empty()) {
    LatentState s = std::move(frontier.front());
    frontier.pop_front();
    if (goal_reached(task, s)) {
      std::vector<std::string> path;
      LatentState cur = s;
      while (cur != start) {
        const auto& [prev, action] = parent.at(cur);
        path.push_back(action);
        cur = prev;
      }
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (auto& [action, next] : successors(s)) {
      if (seen.insert(next).second) {
        parent.emplace(next, std::make_pair(s, action));
        frontier.push_back(std::move(next));
      }
    }
  }
  return std::nullopt;
}

// ---- JSON --------------------------------------------------------------------

namespace {

json features_json(const std::map<std::string, FeatureValue>& features) {
  json j = json::object();
  for (const auto& [k, v] : features) {
    if (const double* d = std::get_if<double>(&v)) {
      j[k] = *d;
    } else {
      j[k] = std::get<std::string>(v);
    }
  }
  return j;
}

std::map<std::string, FeatureValue> features_from(const json& j) {
  std::map<std::string, FeatureValue> out;
  for (const auto& [k, v] : j.items()) {
    if (v.is_number()) {
      out.emplace(k, v.get<double>());
    } else {
      out.emplace(k, v.get<std::string>());
    }
  }
  return out;
}

}  // namespace

json Environment::to_json() const {
  json screens = json::object();
  for (const auto& [id, s] : screens_) {
    screens[id] = {{"menu", s.menu}, {"features", features_json(s.features)}};
  }
  json edges = json::object();
  for (const auto& [from, by_action] : edges_) {
    json e = json::object();
    for (const auto& [action, edge] : by_action) {
      e[action] = {{"to", edge.to}, {"add", edge.delta.add}, {"remove", edge.delta.remove}};
    }
    edges[from] = std::move(e);
  }
  json tasks = json::array();
  for (const TaskSpec& t : tasks_) {
    tasks.push_back({{"key", t.instruction.key},
                     {"goal", t.instruction.goal_text},
                     {"difficulty", difficulty_name(t.instruction.difficulty)},
                     {"start_screen", t.start_screen},
                     {"goal_facts", t.goal_facts},
                     {"horizon", t.horizon},
                     {"shortest_length", t.shortest_length},
                     {"transition_steps", t.transition_steps},
                     {"parameters", t.parameters}});
  }
  return {{"schema_version", kEnvSchemaVersion},
          {"grammar", grammar_.to_json()},
          {"screens", std::move(screens)},
          {"edges", std::move(edges)},
          {"tasks", std::move(tasks)}};
}

Environment Environment::from_json(const json& j) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kEnvSchemaVersion) {
      throw VersionError("unsupported environment schema_version " + std::to_string(version));
    }
    ActionGrammar grammar = ActionGrammar::from_json(j.at("grammar"));
    std::map<std::string, Screen> screens;
    for (const auto& [id, s] : j.at("screens").items()) {
      screens.emplace(id, Screen{id, s.at("menu").get<std::vector<std::string>>(),
                                 features_from(s.value("features", json::object()))});
    }
    EdgeTable edges;
    for (const auto& [from, by_action] : j.at("edges").items()) {
      for (const auto& [action, e] : by_action.items()) {
        edges[from][action] = Edge{e.at("to").get<std::string>(),
                                   {e.value("add", std::vector<std::string>{}),
                                    e.value("remove", std::vector<std::string>{})}};
      }
    }
    std::vector<TaskSpec> tasks;
    for (const json& t : j.at("tasks")) {
      TaskSpec task;
      task.instruction.key = t.at("key").get<std::string>();
      task.instruction.goal_text = t.at("goal").get<std::string>();
      task.instruction.difficulty = parse_difficulty(t.at("difficulty").get<std::string>());
      task.start_screen = t.at("start_screen").get<std::string>();
      task.goal_facts = t.at("goal_facts").get<std::vector<std::string>>();
      task.horizon = t.at("horizon").get<int>();
      task.shortest_length = t.value("shortest_length", 0);
      task.transition_steps = t.at("transition_steps").get<std::vector<std::string>>();
      task.parameters = t.value("parameters", std::vector<std::string>{});
      tasks.push_back(std::move(task));
    }
    return Environment(std::move(screens), std::move(edges), std::move(tasks),
                       std::move(grammar));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed environment document: ") + e.what());
  }
}

// ---- generation --------------------------------------------------------------

Difficulty tier_for_length(int length) {
  if (length <= 5) return Difficulty::kEasy;
  if (length <= 10) return Difficulty::kMedium;
  return Difficulty::kHard;
}

SuiteConfig parse_suite(std::string_view text, SuiteConfig base) {
  base.easy = base.medium = base.hard = 0;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ParseError("suite entry '" + item + "' lacks ':'");
    const std::string tier = item.substr(0, colon);
    int count = 0;
    try {
      std::size_t used = 0;
      count = std::stoi(item.substr(colon + 1), &used);
      if (used != item.size() - colon - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError("suite entry '" + item + "' has a bad count");
    }
    if (count < 0) throw ParseError("suite counts must be nonnegative");
    switch (parse_difficulty(tier)) {
      case Difficulty::kEasy:
        base.easy = count;
        break;
      case Difficulty::kMedium:
        base.medium = count;
        break;
      case Difficulty::kHard:
        base.hard = count;
        break;
    }
  }
  return base;
}

namespace {

const std::vector<std::string> kApps = {
    "Notes",   "Contacts", "Calendar", "Files",   "Recipes", "Expenses",
    "Tasks",   "Gallery",  "Music",    "Maps",    "Messages", "Browser",
    "Weather", "Fitness",  "Podcasts", "Wallet",  "Journal", "Library"};
const std::vector<std::string> kFields = {
    "note name",   "title",   "phone number", "email address", "category",
    "description", "location", "tag label",   "folder name",   "comment",
    "amount",      "nickname", "subject line", "street address"};
const std::vector<std::string> kValues = {
    "Bob",      "Alice",   "Groceries", "Dentist",  "Budget",   "Holiday",
    "Carol",    "Invoice", "Marathon",  "Birthday", "Quarterly", "Garden",
    "Seminar",  "Recital", "Plumber",   "Vacation", "Receipts", "Lecture",
    "Workshop", "Daniel",  "Eleanor",   "Frank",    "Harbor",   "Orchard"};
const std::vector<std::string> kSettings = {
    "dark mode",    "notifications", "auto sync",     "location access",
    "reminders",    "cloud backup",  "offline mode",  "sound effects",
    "read receipts", "high contrast", "battery saver", "vibration"};
const std::vector<std::string> kCommit = {"Save",   "Confirm", "Done",   "Apply",
                                          "Submit", "Create",  "Send",   "Finish"};
const std::vector<std::string> kNav = {"Next",    "Edit",  "Details", "New",
                                       "Add",     "Compose", "Open",  "Continue"};
const std::vector<std::string> kTabs = {"Favorites", "Recent",   "Archive", "Shared",
                                        "Overview",  "Inbox",    "Schedule", "Starred"};
const std::vector<std::string> kDetour = {"Help", "Profile", "Feedback", "About",
                                          "Account", "Tips"};
const std::vector<std::string> kDecoy = {"Cancel", "Share", "Print",  "Refresh",
                                         "Sort",   "Filter", "Copy", "Rename"};
const std::vector<std::string> kMalformed = {
    "click(\"Save\"", "tap(\"OK\")", "scroll(left)", "input(\"text\")",
    "",               "click(Save)", "back(",       "open()",
    "select(\"\")",   "toggle on"};
const std::string kAltButton = "More actions";

std::string quote(const std::string& s) { return "\"" + s + "\""; }

struct StepPlan {
  std::string action;  // canonical raw text
  bool adds_fact = false;
  std::string parameter;  // slot value, if any
};

template <typename T>
const T& pick(const std::vector<T>& pool, Rng& rng) {
  return pool[rng.below(pool.size())];
}

// Picks from `pool` avoiding values already in `used`.
std::string pick_unused(const std::vector<std::string>& pool, std::set<std::string>& used,
                        Rng& rng) {
  std::vector<std::string> free;
  for (const std::string& s : pool) {
    if (!used.contains(s)) free.push_back(s);
  }
  if (free.empty()) throw GenerationError("word pool exhausted");
  std::string out = free[rng.below(free.size())];
  used.insert(out);
  return out;
}

std::string lower_first(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
  return s;
}

class SuiteBuilder {
 public:
  explicit SuiteBuilder(const SuiteConfig& config)
      : config_(config), grammar_(ActionGrammar::gui_default()) {}

  void add_task(int index, Difficulty tier, int length, Rng& rng);

  Environment build() {
    return Environment(std::move(screens_), std::move(edges_), std::move(tasks_),
                       std::move(grammar_));
  }

 private:
  Screen& add_screen(const std::string& id, const std::string& app,
                     const std::string& kind, int depth) {
    Screen s{id, {}, {{"app", app}, {"kind", kind}, {"depth", static_cast<double>(depth)}}};
    return screens_.emplace(id, std::move(s)).first->second;
  }

  void add_edge(const std::string& from, const std::string& action, const std::string& to,
                FactDelta delta) {
    edges_[from][action] = Edge{to, std::move(delta)};
  }

  bool similar(const std::string& a, const std::string& b,
               const std::vector<std::string>& params) const {
    const EmbeddingVector ea = embedder_.embed(generalize_description(a, params));
    const EmbeddingVector eb = embedder_.embed(b);
    return cosine(ea, eb) > kSimilarityGuard;
  }

  // Distractor texts must not look like the milestone of the forward action.
  static constexpr double kSimilarityGuard = 0.75;

  const SuiteConfig& config_;
  ActionGrammar grammar_;
  HashedBagOfWordsEmbedder embedder_;
  std::map<std::string, Screen> screens_;
  Environment::EdgeTable edges_;
  std::vector<TaskSpec> tasks_;
  std::set<std::string> used_apps_;
};

void SuiteBuilder::add_task(int index, Difficulty tier, int length, Rng& rng) {
  const std::string app = pick_unused(kApps, used_apps_, rng);
  std::string lower_app = app;
  for (char& c : lower_app) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  char prefix_buf[16];
  std::snprintf(prefix_buf, sizeof prefix_buf, "t%02d", index);
  const std::string prefix = prefix_buf;
  const std::string key = prefix + "_" + lower_app;

  // Plan the intended path: open the app, a mix of navigation and
  // fact-adding steps, and a final commit that always adds a fact.
  std::set<std::string> used_words;
  std::vector<StepPlan> plan;
  plan.push_back({"open(" + quote(app) + ")", false, {}});
  for (int j = 1; j < length; ++j) {
    StepPlan p;
    const bool last = (j == length - 1);
    if (last) {
      p.action = "click(" + quote(pick_unused(kCommit, used_words, rng)) + ")";
      p.adds_fact = true;
    } else if (rng.uniform() < config_.fact_step_fraction) {
      p.adds_fact = true;
      switch (rng.below(3)) {
        case 0: {
          p.parameter = pick_unused(kValues, used_words, rng);
          const std::string field = pick_unused(kFields, used_words, rng);
          p.action = "input(" + quote(p.parameter) + ", " + quote(field) + ")";
          break;
        }
        case 1:
          p.action = "toggle(" + quote(pick_unused(kSettings, used_words, rng)) + ")";
          break;
        default:
          p.parameter = pick_unused(kValues, used_words, rng);
          p.action = "select(" + quote(p.parameter) + ")";
          break;
      }
    } else if (rng.below(2) == 0) {
      p.action = "tab(" + quote(pick_unused(kTabs, used_words, rng)) + ")";
    } else {
      p.action = "click(" + quote(pick_unused(kNav, used_words, rng)) + ")";
    }
    plan.push_back(std::move(p));
  }

  TaskSpec task;
  task.instruction.key = key;
  task.instruction.difficulty = tier;
  task.horizon = config_.horizon;
  task.start_screen = prefix + ".launcher";
  for (const StepPlan& p : plan) {
    if (!p.parameter.empty()) task.parameters.push_back(p.parameter);
  }

  auto screen_id = [&](int j) {
    if (j == 0) return prefix + ".launcher";
    return prefix + ".s" + std::to_string(j);
  };
  auto fact_of = [&](int j) { return prefix + ".f" + std::to_string(j); };

  // Optional longer route through a "More actions" sheet that reaches the
  // same next screen, passing through an extra non-goal fact.
  int alt_step = -1;
  if (rng.uniform() < config_.alt_route_prob) {
    std::vector<int> candidates;
    for (int j = 1; j + 1 < length; ++j) {
      if (plan[j].adds_fact) candidates.push_back(j);
    }
    if (!candidates.empty()) alt_step = candidates[rng.below(candidates.size())];
  }

  std::vector<std::string> goal_descriptions;
  for (int j = 0; j <= length; ++j) {
    const std::string id = screen_id(j);
    const std::string kind = j == 0 ? "launcher" : (j == length ? "done" : "chain");
    add_screen(id, app, kind, j);
  }

  for (int j = 0; j < length; ++j) {
    const std::string id = screen_id(j);
    const StepPlan& p = plan[j];
    const std::string forward_desc = grammar_.description(*grammar_.parse(p.action));
    std::vector<std::string> menu;

    FactDelta forward_delta;
    if (p.adds_fact) {
      forward_delta.add.push_back(fact_of(j));
      task.goal_facts.push_back(fact_of(j));
      task.transition_steps.push_back(p.action);
      goal_descriptions.push_back(lower_first(forward_desc));
    }
    add_edge(id, p.action, screen_id(j + 1), forward_delta);
    menu.push_back(p.action);

    menu.push_back("scroll(down)");
    for (int d = 0; d < config_.decoys_per_screen; ++d) {
      for (int attempt = 0; attempt < 32; ++attempt) {
        const std::string decoy = "click(" + quote(pick(kDecoy, rng)) + ")";
        if (std::find(menu.begin(), menu.end(), decoy) != menu.end()) continue;
        if (similar(forward_desc, grammar_.describe(decoy).description, task.parameters)) {
          continue;
        }
        menu.push_back(decoy);
        break;
      }
    }
    menu.push_back(pick(kMalformed, rng));

    if (j > 0 && rng.uniform() < config_.back_edge_prob) {
      FactDelta undo;
      if (plan[j - 1].adds_fact) undo.remove.push_back(fact_of(j - 1));
      add_edge(id, "back()", screen_id(j - 1), undo);
      menu.push_back("back()");
    }

    if (rng.uniform() < config_.detour_prob) {
      const std::string side = id + ".side";
      const std::string button = pick(kDetour, rng);
      const std::string action = "click(" + quote(button) + ")";
      if (!similar(forward_desc, grammar_.describe(action).description, task.parameters)) {
        add_screen(side, app, "side", j);
        add_edge(id, action, side, {});
        add_edge(side, "back()", id, {});
        screens_.at(side).menu = {"back()", "scroll(down)", pick(kMalformed, rng)};
        menu.push_back(action);
      }
    }

    if (j == alt_step) {
      const std::string alt = id + ".alt";
      const std::string alt_fact = prefix + ".alt";
      const std::string open_alt = "click(" + quote(kAltButton) + ")";
      add_screen(alt, app, "sheet", j);
      add_edge(id, open_alt, alt, {{alt_fact}, {}});
      add_edge(alt, p.action, screen_id(j + 1), forward_delta);
      add_edge(alt, "back()", id, {{}, {alt_fact}});
      std::vector<std::string> alt_menu = {p.action, "back()", "scroll(down)",
                                           pick(kMalformed, rng)};
      rng.shuffle(std::span<std::string>(alt_menu));
      screens_.at(alt).menu = std::move(alt_menu);
      menu.push_back(open_alt);
    }

    rng.shuffle(std::span<std::string>(menu));
    screens_.at(id).menu = std::move(menu);
  }
  // Terminal screen: rollouts stop on arrival, but the menu must be usable.
  screens_.at(screen_id(length)).menu = {"scroll(down)", "scroll(up)"};

  std::string goal = "In the " + app + " app: ";
  for (std::size_t i = 0; i < goal_descriptions.size(); ++i) {
    if (i > 0) goal += (i + 1 == goal_descriptions.size()) ? ", then " : ", ";
    goal += goal_descriptions[i];
  }
  task.instruction.goal_text = goal + ".";
  task.shortest_length = length;
  tasks_.push_back(std::move(task));
}

void check_band(const TierBand& band, Difficulty tier) {
  if (band.min_length < 2 || band.max_length < band.min_length ||
      tier_for_length(band.min_length) != tier || tier_for_length(band.max_length) != tier) {
    throw GenerationError("length band for tier '" + std::string(difficulty_name(tier)) +
                          "' violates the tier rule (easy <= 5, medium 6-10, hard >= 11)");
  }
}

}  // namespace

Environment generate_suite(const SuiteConfig& config) {
  if (config.easy < 0 || config.medium < 0 || config.hard < 0) {
    throw GenerationError("tier counts must be nonnegative");
  }
  if (config.easy + config.medium + config.hard == 0) {
    throw GenerationError("suite requests no tasks");
  }
  if (config.easy + config.medium + config.hard > static_cast<int>(kApps.size())) {
    throw GenerationError("suite requests more than " + std::to_string(kApps.size()) +
                          " tasks");
  }
  const std::pair<Difficulty, std::pair<int, TierBand>> tiers[] = {
      {Difficulty::kEasy, {config.easy, config.easy_band}},
      {Difficulty::kMedium, {config.medium, config.medium_band}},
      {Difficulty::kHard, {config.hard, config.hard_band}},
  };
  for (const auto& [tier, spec] : tiers) {
    const auto& [count, band] = spec;
    if (count == 0) continue;
    check_band(band, tier);
    if (band.min_length > config.horizon) {
      throw GenerationError("tier '" + std::string(difficulty_name(tier)) + "' needs at least " +
                            std::to_string(band.min_length) + " steps but the horizon is " +
                            std::to_string(config.horizon));
    }
  }

  SuiteBuilder builder(config);
  int index = 0;
  for (const auto& [tier, spec] : tiers) {
    const auto& [count, band] = spec;
    for (int i = 0; i < count; ++i, ++index) {
      Rng rng(derive_seed(config.seed, {static_cast<std::uint64_t>(index)}));
      const int max_len = std::min(band.max_length, config.horizon);
      const int length =
          band.min_length + static_cast<int>(rng.below(static_cast<std::size_t>(
                                max_len - band.min_length + 1)));
      builder.add_task(index, tier, length, rng);
    }
  }
  Environment env = builder.build();

  for (const TaskSpec& t : env.tasks()) {
    auto path = env.shortest_solution(t);
    if (!path || static_cast<int>(path->size()) != t.shortest_length ||
        static_cast<int>(path->size()) > t.horizon ||
        tier_for_length(static_cast<int>(path->size())) != t.instruction.difficulty) {
      throw GenerationError("generated task '" + t.instruction.key +
                            "' failed the solvability/tier check");
    }
  }
  return env;
}

// ---- rollout -----------------------------------------------------------------

Trajectory rollout(const Environment& env, const RolloutPolicy& policy,
                   const TaskSpec& task, std::uint64_t seed, bool score) {
  Rng rng(seed);
  Trajectory trajectory;
  trajectory.instruction_key = task.instruction.key;
  LatentState state = env.initial_state(task);
  for (int t = 0; t < task.horizon; ++t) {
    Observation obs = env.observe(state);
    std::span<const ActionRecord> menu = env.menu(state.screen);
    const std::size_t choice = policy.choose(obs, task, menu, rng);
    if (choice >= menu.size()) throw LookupError("policy chose an action outside the menu");
    trajectory.steps.push_back(Step{t, std::move(obs), menu[choice]});
    state = env.step(state, menu[choice]).state;
    if (env.goal_reached(task, state)) break;
  }
  if (score) outcome_score(trajectory, env);
  return trajectory;
}

}  // namespace mrl
