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

#ifndef MRL_ACTION_GRAMMAR_HPP_
#define MRL_ACTION_GRAMMAR_HPP_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mrl/trajectory.hpp"

namespace mrl {

enum class ArgKind {
  kString,  // double-quoted literal, no embedded quotes or newlines
  kEnum,    // bare lowercase identifier from `allowed`
};

struct ArgSpec {
  std::string name;
  ArgKind kind = ArgKind::kString;
  std::vector<std::string> allowed;  // kEnum only

  bool operator==(const ArgSpec&) const = default;
};

// One action verb. The description template refers to arguments as {0},
// {1}, ... and produces the natural-language text used for matching.
struct ActionSchema {
  std::string name;
  std::vector<ArgSpec> args;
  std::string description_template;

  bool operator==(const ActionSchema&) const = default;
};

struct ParsedAction {
  std::string name;
  std::vector<std::string> args;

  // Normal form used as the transition-table key, e.g. input("Bob", "title").
  std::string canonical() const;
  bool operator==(const ParsedAction&) const = default;
};

// Declarative action syntax:  name '(' [arg {',' arg}] ')'
// with surrounding whitespace allowed between tokens.
class ActionGrammar {
 public:
  ActionGrammar() = default;
  explicit ActionGrammar(std::vector<ActionSchema> schemas);

  // The GUI verbs SynthNav uses: open, click, select, input, toggle, tab,
  // scroll, back.
  static ActionGrammar gui_default();

  // nullopt when the text does not parse or violates the schema.
  std::optional<ParsedAction> parse(std::string_view raw) const;

  // Builds the record for an emitted action string. Invalid actions get an
  // empty description and syntax_valid=false.
  ActionRecord describe(std::string_view raw) const;

  std::string description(const ParsedAction& action) const;

  const std::vector<ActionSchema>& schemas() const { return schemas_; }

  nlohmann::json to_json() const;
  static ActionGrammar from_json(const nlohmann::json& j);

  bool operator==(const ActionGrammar& other) const {
    return schemas_ == other.schemas_;
  }

 private:
  const ActionSchema* find(std::string_view name) const;

  std::vector<ActionSchema> schemas_;
};

}  // namespace mrl

#endif  // MRL_ACTION_GRAMMAR_HPP_
