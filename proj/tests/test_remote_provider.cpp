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

#include <atomic>
#include <chrono>
#include <string>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "mrl/error.hpp"
#include "mrl/remote_provider.hpp"

using namespace mrl;

namespace {

// Local stub that answers every route with a configurable body.
class StubServer {
 public:
  StubServer() {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      last_path_ = req.path;
      last_body_ = req.body;
      if (delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_.load()));
      res.status = status_;
      res.set_content(body_, "application/json");
    };
    server_.Post("/v1/initialize", handler);
    server_.Post("/v1/refine", handler);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  EndpointConfig config(double timeout = 5.0) const {
    EndpointConfig c;
    c.host = "127.0.0.1";
    c.port = port_;
    c.base_path = "/v1";
    c.timeout_seconds = timeout;
    return c;
  }

  std::string body_ = "[]";
  int status_ = 200;
  std::atomic<int> delay_ms_{0};
  std::string last_path_;
  std::string last_body_;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

Trajectory two_steps() {
  Trajectory t;
  t.instruction_key = "k";
  t.outcome = 1;
  t.steps.push_back({0, {"Home", {}}, {"open(\"Notes\")", "Open the Notes app", true}});
  t.steps.push_back({1, {"Notes", {}}, {"click(\"Save\")", "Click the 'Save' button", true}});
  return t;
}

const Instruction kGoal{"k", "Save a note", Difficulty::kEasy};

}  // namespace

TEST_CASE("remote provider contract") {
  StubServer stub;
  auto provider = remote_provider(stub.config());

  SUBCASE("array answer") {
    stub.body_ = R"(["Open <App>","Tap Save"])";
    const MilestoneSet m = provider->initialize(two_steps(), kGoal);
    CHECK(m.size() == 2);
    CHECK(m.texts() == std::vector<std::string>{"Open <App>", "Tap Save"});
    CHECK(stub.last_path_ == "/v1/initialize");
    const auto req = nlohmann::json::parse(stub.last_body_);
    CHECK(req["goal"] == "Save a note");
    CHECK(req["actions"].size() == 2);
    CHECK_FALSE(req.contains("current_milestones"));
  }
  SUBCASE("refine sends the current set") {
    stub.body_ = R"(["Tap Save"])";
    MilestoneSet current{"k", {{"Open <App>"}, {"Tap Save"}}, 0, 2};
    const auto refined = provider->refine(two_steps(), current, kGoal);
    REQUIRE(refined.has_value());
    CHECK(refined->size() == 1);
    CHECK(stub.last_path_ == "/v1/refine");
    CHECK(nlohmann::json::parse(stub.last_body_)["current_milestones"].size() == 2);
    stub.body_ = R"(["Open <App>","Tap Save"])";
    CHECK_FALSE(provider->refine(two_steps(), current, kGoal).has_value());
  }
  SUBCASE("prose answer") {
    stub.body_ = "Here are the milestones: open the app, then save.";
    CHECK_THROWS_AS(provider->initialize(two_steps(), kGoal), ProviderError);
  }
  SUBCASE("empty array") {
    stub.body_ = "[]";
    CHECK_THROWS_AS(provider->initialize(two_steps(), kGoal), ProviderError);
  }
  SUBCASE("non-string items") {
    stub.body_ = R"(["ok", 3])";
    CHECK_THROWS_AS(provider->initialize(two_steps(), kGoal), ProviderError);
  }
  SUBCASE("object answer") {
    stub.body_ = R"({"milestones":["a"]})";
    CHECK_THROWS_AS(provider->initialize(two_steps(), kGoal), ProviderError);
  }
  SUBCASE("http error") {
    stub.body_ = R"(["a"])";
    stub.status_ = 500;
    CHECK_THROWS_AS(provider->initialize(two_steps(), kGoal), ProviderError);
  }
  SUBCASE("bad placeholders") {
    stub.body_ = R"(["Open <App"])";
    CHECK_THROWS_AS(provider->initialize(two_steps(), kGoal), ProviderError);
  }
}

TEST_CASE("remote provider timeout") {
  StubServer stub;
  stub.body_ = R"(["a"])";
  stub.delay_ms_ = 1500;
  auto provider = remote_provider(stub.config(0.2));
  const auto start = std::chrono::steady_clock::now();
  CHECK_THROWS_AS(provider->initialize(two_steps(), kGoal), ProviderError);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::milliseconds(1400));
}

TEST_CASE("unreachable endpoint") {
  EndpointConfig c;
  c.host = "127.0.0.1";
  c.port = 1;
  c.timeout_seconds = 1.0;
  CHECK_THROWS_AS(remote_provider(c)->initialize(two_steps(), kGoal), ProviderError);
}

TEST_CASE("array parser") {
  CHECK(parse_milestone_array(R"(["a","b"])") == std::vector<std::string>{"a", "b"});
  CHECK_THROWS_AS(parse_milestone_array(""), ProviderError);
  CHECK_THROWS_AS(parse_milestone_array(R"([""])"), ProviderError);
}
