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

#ifndef MRL_REMOTE_PROVIDER_HPP_
#define MRL_REMOTE_PROVIDER_HPP_

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mrl/milestone_memory.hpp"

namespace mrl {

struct EndpointConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string base_path;  // prefix for /initialize and /refine
  double timeout_seconds = 30.0;
};

// Parses a response body that must be a JSON array of nonempty strings with
// at least one element. Throws ProviderError otherwise.
std::vector<std::string> parse_milestone_array(std::string_view body);

// Delegates abstraction to an HTTP service (for example an LLM wrapper):
//   POST {base}/initialize  {"goal", "actions"}
//   POST {base}/refine      {"goal", "actions", "current_milestones"}
// Both answer with a JSON array of milestone strings. A refine answer equal
// to the current milestones means "unchanged".
class RemoteProvider final : public AbstractionProvider {
 public:
  explicit RemoteProvider(EndpointConfig config);
  ~RemoteProvider() override;

  MilestoneSet initialize(const Trajectory& trajectory, const Instruction& goal) override;
  std::optional<MilestoneSet> refine(const Trajectory& trajectory, const MilestoneSet& current,
                                     const Instruction& goal) override;

 private:
  std::vector<std::string> post(const std::string& route, const std::string& body);

  EndpointConfig config_;
};

std::unique_ptr<AbstractionProvider> remote_provider(EndpointConfig config);

}  // namespace mrl

#endif  // MRL_REMOTE_PROVIDER_HPP_
