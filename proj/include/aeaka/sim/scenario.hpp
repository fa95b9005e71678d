// Copyright 2026 The AEAKA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON scenario files: a topology plus a script of actions, each with an
// optional expected outcome. docs/scenarios.md describes the format.
#ifndef AEAKA_SIM_SCENARIO_HPP_
#define AEAKA_SIM_SCENARIO_HPP_

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aeaka/sim/cost.hpp"
#include "aeaka/sim/world.hpp"

namespace aeaka::sim {

struct Scenario {
  std::string name;
  WorldConfig config;
  nlohmann::json topology;
  std::vector<nlohmann::json> script;

  // Throws ProtocolError(kScenarioError) on malformed input or a reference
  // to an undeclared entity.
  static Scenario parse(std::string_view text);
  static Scenario load(const std::string& path);
};

struct ActionOutcome {
  std::size_t step = 0;
  std::string action;
  std::string expect;  // empty when the step asserts nothing
  std::string actual;
  bool ok = true;
};

struct ScenarioResult {
  std::string transcript;
  CostReport cost;
  std::vector<AuthRun> runs;
  std::vector<ActionOutcome> outcomes;

  bool passed() const;
};

ScenarioResult run(const Scenario& scenario);

// Empty when the scenario asserts at least one accept and, if it contains
// adversary actions, at least one reject; otherwise the reason.
std::string vacuity_problem(const Scenario& scenario);

}  // namespace aeaka::sim

#endif  // AEAKA_SIM_SCENARIO_HPP_
