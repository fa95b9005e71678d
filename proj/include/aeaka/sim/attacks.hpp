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

// Dolev-Yao attack batteries. Each battery builds the canonical topology
// from a seed, performs honest baseline runs, then mounts its attacks and
// counts how many the honest parties rejected.
#ifndef AEAKA_SIM_ATTACKS_HPP_
#define AEAKA_SIM_ATTACKS_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "aeaka/sim/world.hpp"

namespace aeaka::sim {

struct AttackReport {
  std::string name;
  std::size_t attempts = 0;
  std::size_t rejected = 0;
  // Honest baseline (and insider controls) behaved as expected.
  bool sanity_ok = true;
  std::vector<std::string> lines;     // one per attempt group
  std::vector<std::string> breaches;  // attempts that were accepted
  std::string transcript;

  bool passed() const { return attempts > 0 && rejected == attempts && sanity_ok; }
};

// replay, tamper, impersonate-device, impersonate-es, impersonate-cs,
// steal-device.
const std::vector<std::string>& attack_names();
bool is_attack_name(std::string_view name);

// Throws ProtocolError(kScenarioError) on an unknown name.
AttackReport run_attack(std::string_view name, const WorldConfig& config);

// Msg1 built from a claimed pid and a guessed credential a.
wire::AuthRequest forge_msg1(const Digest& pid, const Digest& a, std::string_view ser_req,
                             Timestamp t, Rng& rng);

struct StolenStoreResult {
  std::size_t attempts = 0;
  std::size_t accepted = 0;
  bool insider_accepted = false;
};

// Reads the stolen store of `device` and tries to authenticate to `edge`
// without the password: every b used directly as a, then `guesses` random
// EPW values. Finishes with one insider control that knows UID and PW.
StolenStoreResult stolen_store_attack(World& world, const std::string& device,
                                      const std::string& edge, std::size_t guesses, Rng& rng);

}  // namespace aeaka::sim

#endif  // AEAKA_SIM_ATTACKS_HPP_
