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

#include "mrl/action_grammar.hpp"

#include <algorithm>
#include <cctype>

#include "mrl/error.hpp"

namespace mrl {

using nlohmann::json;

std::string ParsedAction::canonical() const {
  std::string out = name + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i > 0) out += ", ";
    out += args[i];
  }
  return out + ")";
}

ActionGrammar::ActionGrammar(std::vector<ActionSchema> schemas)
    : schemas_(std::move(schemas)) {}

ActionGrammar ActionGrammar::gui_default() {
  const ArgSpec str = {"target", ArgKind::kString, {}};
  return ActionGrammar({
      {"open", {{"app", ArgKind::kString, {}}}, "Open the {0} app"},
      {"click", {str}, "Click the '{0}' button"},
      {"select", {{"item", ArgKind::kString, {}}}, "Select the '{0}' entry in the list"},
      {"input",
       {{"text", ArgKind::kString, {}}, {"field", ArgKind::kString, {}}},
       "Input '{0}' as the {1}"},
      {"toggle", {{"setting", ArgKind::kString, {}}}, "Toggle the {0} switch"},
      {"tab", {{"name", ArgKind::kString, {}}}, "Switch to the {0} tab"},
      {"scroll", {{"direction", ArgKind::kEnum, {"up", "down"}}}, "Scroll {0} on the page"},
      {"back", {}, "Navigate back to the previous screen"},
  });
}

const ActionSchema* ActionGrammar::find(std::string_view name) const {
  for (const ActionSchema& s : schemas_) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool done() const { return pos_ >= s_.size(); }
  char peek() const { return done() ? '\0' : s_[pos_]; }
  bool consume(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }
  std::string identifier() {
    std::string out;
    while (!done() && (std::islower(static_cast<unsigned char>(peek())) || peek() == '_')) {
      out += s_[pos_++];
    }
    return out;
  }
  std::optional<std::string> quoted() {
    if (!consume('"')) return std::nullopt;
    std::string out;
    while (!done() && peek() != '"') {
      if (peek() == '\n') return std::nullopt;
      out += s_[pos_++];
    }
    if (!consume('"')) return std::nullopt;
    return out;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::optional<ParsedAction> ActionGrammar::parse(std::string_view raw) const {
  Cursor c(raw);
  c.skip_ws();
  ParsedAction action;
  action.name = c.identifier();
  const ActionSchema* schema = find(action.name);
  if (schema == nullptr) return std::nullopt;
  c.skip_ws();
  if (!c.consume('(')) return std::nullopt;
  c.skip_ws();
  std::vector<std::string> values;
  if (!c.consume(')')) {
    while (true) {
      c.skip_ws();
      const std::size_t i = values.size();
      if (i >= schema->args.size()) return std::nullopt;
      const ArgSpec& spec = schema->args[i];
      if (spec.kind == ArgKind::kString) {
        auto v = c.quoted();
        if (!v || v->empty()) return std::nullopt;
        values.push_back(*v);
      } else {
        std::string v = c.identifier();
        if (std::find(spec.allowed.begin(), spec.allowed.end(), v) == spec.allowed.end()) {
          return std::nullopt;
        }
        values.push_back(v);
      }
      c.skip_ws();
      if (c.consume(')')) break;
      if (!c.consume(',')) return std::nullopt;
    }
  }
  c.skip_ws();
  if (!c.done()) return std::nullopt;
  if (values.size() != schema->args.size()) return std::nullopt;
  for (std::size_t i = 0; i < values.size(); ++i) {
    action.args.push_back(schema->args[i].kind == ArgKind::kString
                              ? "\"" + values[i] + "\""
                              : values[i]);
  }
  return action;
}

std::string ActionGrammar::description(const ParsedAction& action) const {
  const ActionSchema* schema = find(action.name);
  if (schema == nullptr) throw LookupError("unknown action '" + action.name + "'");
  std::string out;
  const std::string& tpl = schema->description_template;
  for (std::size_t i = 0; i < tpl.size(); ++i) {
    if (tpl[i] == '{' && i + 2 < tpl.size() && std::isdigit(static_cast<unsigned char>(tpl[i + 1])) &&
        tpl[i + 2] == '}') {
      const std::size_t arg = static_cast<std::size_t>(tpl[i + 1] - '0');
      if (arg < action.args.size()) {
        std::string v = action.args[arg];
        if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
        out += v;
      }
      i += 2;
    } else {
      out += tpl[i];
    }
  }
  return out;
}

ActionRecord ActionGrammar::describe(std::string_view raw) const {
  ActionRecord record;
  record.raw_text = std::string(raw);
  if (auto parsed = parse(raw)) {
    record.syntax_valid = true;
    record.description = description(*parsed);
  }
  return record;
}

json ActionGrammar::to_json() const {
  json out = json::array();
  for (const ActionSchema& s : schemas_) {
    json args = json::array();
    for (const ArgSpec& a : s.args) {
      json arg = {{"name", a.name}, {"kind", a.kind == ArgKind::kString ? "string" : "enum"}};
      if (a.kind == ArgKind::kEnum) arg["allowed"] = a.allowed;
      args.push_back(std::move(arg));
    }
    out.push_back({{"name", s.name}, {"args", std::move(args)},
                   {"description", s.description_template}});
  }
  return out;
}

ActionGrammar ActionGrammar::from_json(const json& j) {
  if (!j.is_array()) throw ParseError("action grammar must be an array");
  std::vector<ActionSchema> schemas;
  try {
    for (const json& s : j) {
      ActionSchema schema;
      schema.name = s.at("name").get<std::string>();
      schema.description_template = s.at("description").get<std::string>();
      for (const json& a : s.at("args")) {
        ArgSpec arg;
        arg.name = a.at("name").get<std::string>();
        const std::string kind = a.at("kind").get<std::string>();
        if (kind == "string") {
          arg.kind = ArgKind::kString;
        } else if (kind == "enum") {
          arg.kind = ArgKind::kEnum;
          arg.allowed = a.at("allowed").get<std::vector<std::string>>();
        } else {
          throw ParseError("unknown argument kind '" + kind + "'");
        }
        schema.args.push_back(std::move(arg));
      }
      schemas.push_back(std::move(schema));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad action grammar: ") + e.what());
  }
  return ActionGrammar(std::move(schemas));
}

}  // namespace mrl
