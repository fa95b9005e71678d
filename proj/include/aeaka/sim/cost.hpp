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

// Per-run cost accounting: hash invocations per role and accounted message
// sizes, plus measured handler time (informational only).

#ifndef AEAKA_SIM_COST_HPP_
#define AEAKA_SIM_COST_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "aeaka/wire.hpp"

namespace aeaka::sim {

inline constexpr const char* kRoleDevice = "device";
inline constexpr const char* kRoleEdge = "es";
inline constexpr const char* kRoleCloud = "cs";

struct MessageCost {
  wire::MessageType type;
  std::size_t bits = 0;
  bool operator==(const MessageCost&) const = default;
};

struct CaseCost {
  int protocol_case = 0;
  std::map<std::string, std::uint64_t> hashes;  // role -> invocations per run
  std::vector<MessageCost> messages;             // per run, in send order
  std::map<std::string, double> micros;          // role -> mean wall-clock per run
  std::size_t runs = 1;

  std::uint64_t total_hashes() const;
  std::size_t total_bits() const;
  // Same case, same hash counts, same message list.
  bool same_accounting(const CaseCost& other) const;
};

struct CostReport {
  std::vector<CaseCost> cases;  // at most one row per protocol case

  const CaseCost* find(int protocol_case) const;
};

// Folds per-run costs into one row per case, averaging timings. Throws
// std::logic_error if two runs of the same case disagree on hash counts or
// message sizes.
CostReport summarize(const std::vector<CaseCost>& runs);

// The timing section is informational and varies between runs.
std::string emit_cost_table(const CostReport& report, bool with_timing = true);
std::string emit_cost_csv(const CostReport& report);

}  // namespace aeaka::sim

#endif  // AEAKA_SIM_COST_HPP_
