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

#include "mrl/remote_provider.hpp"

#include <chrono>

#include "httplib.h"
#include "json.hpp"
#include "mrl/error.hpp"

namespace mrl {

using nlohmann::json;

std::vector<std::string> parse_milestone_array(std::string_view body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error&) {
    throw ProviderError("provider response is not JSON");
  }
  if (!j.is_array()) throw ProviderError("provider response is not a JSON array");
  if (j.empty()) throw ProviderError("provider returned an empty milestone array");
  std::vector<std::string> out;
  for (const json& item : j) {
    if (!item.is_string() || item.get<std::string>().empty()) {
      throw ProviderError("provider array must contain only nonempty strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

RemoteProvider::RemoteProvider(EndpointConfig config) : config_(std::move(config)) {}

RemoteProvider::~RemoteProvider() = default;

std::vector<std::string> RemoteProvider::post(const std::string& route, const std::string& body) {
  httplib::Client client(config_.host, config_.port);
  const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  auto res = client.Post(config_.base_path + route, body, "application/json");
  if (!res) {
    throw ProviderError("request to " + config_.host + ":" + std::to_string(config_.port) +
                        route + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw ProviderError("provider answered HTTP " + std::to_string(res->status));
  }
  return parse_milestone_array(res->body);
}

namespace {

MilestoneSet to_set(const Trajectory& trajectory, const Instruction& goal,
                    const std::vector<std::string>& texts) {
  MilestoneSet set;
  set.instruction_key = goal.key;
  set.source_length = trajectory.terminal_step();
  for (const std::string& t : texts) set.milestones.push_back({t});
  try {
    set.validate();
  } catch (const AbstractionError& e) {
    throw ProviderError(std::string("provider returned an invalid milestone set: ") + e.what());
  }
  return set;
}

}  // namespace

MilestoneSet RemoteProvider::initialize(const Trajectory& trajectory, const Instruction& goal) {
  const json request = {{"goal", goal.goal_text}, {"actions", trajectory.action_descriptions()}};
  return to_set(trajectory, goal, post("/initialize", request.dump()));
}

std::optional<MilestoneSet> RemoteProvider::refine(const Trajectory& trajectory,
                                                   const MilestoneSet& current,
                                                   const Instruction& goal) {
  const json request = {{"goal", goal.goal_text},
                        {"actions", trajectory.action_descriptions()},
                        {"current_milestones", current.texts()}};
  std::vector<std::string> texts = post("/refine", request.dump());
  if (texts == current.texts()) return std::nullopt;
  return to_set(trajectory, goal, texts);
}

std::unique_ptr<AbstractionProvider> remote_provider(EndpointConfig config) {
  return std::make_unique<RemoteProvider>(std::move(config));
}

}  // namespace mrl
