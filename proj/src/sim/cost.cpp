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

#include "aeaka/sim/cost.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace aeaka::sim {

std::uint64_t CaseCost::total_hashes() const {
  std::uint64_t n = 0;
  for (const auto& [role, count] : hashes) n += count;
  return n;
}

std::size_t CaseCost::total_bits() const {
  std::size_t n = 0;
  for (const auto& m : messages) n += m.bits;
  return n;
}

bool CaseCost::same_accounting(const CaseCost& other) const {
  return protocol_case == other.protocol_case && hashes == other.hashes &&
         messages == other.messages;
}

const CaseCost* CostReport::find(int protocol_case) const {
  for (const auto& c : cases) {
    if (c.protocol_case == protocol_case) return &c;
  }
  return nullptr;
}

CostReport summarize(const std::vector<CaseCost>& runs) {
  CostReport report;
  for (const auto& run : runs) {
    auto it = std::find_if(report.cases.begin(), report.cases.end(),
                           [&](const CaseCost& c) { return c.protocol_case == run.protocol_case; });
    if (it == report.cases.end()) {
      report.cases.push_back(run);
      continue;
    }
    if (!it->same_accounting(run)) {
      throw std::logic_error("Case " + std::to_string(run.protocol_case) +
                             " accounting differs between runs");
    }
    const double n = static_cast<double>(it->runs);
    const double m = static_cast<double>(run.runs);
    for (const auto& [role, us] : run.micros) {
      it->micros[role] = (it->micros[role] * n + us * m) / (n + m);
    }
    it->runs += run.runs;
  }
  std::sort(report.cases.begin(), report.cases.end(),
            [](const CaseCost& a, const CaseCost& b) { return a.protocol_case < b.protocol_case; });
  return report;
}

namespace {

std::string hash_cell(const CaseCost& c, const char* role) {
  auto it = c.hashes.find(role);
  if (it == c.hashes.end() || it->second == 0) return "-";
  return std::to_string(it->second) + "T_h";
}

}  // namespace

std::string emit_cost_table(const CostReport& report, bool with_timing) {
  std::ostringstream os;
  os << "Computation cost (hash invocations per run)\n";
  os << std::left << std::setw(10) << "" << std::setw(10) << "Device" << std::setw(10) << "ES"
     << std::setw(10) << "CS" << "Total\n";
  for (const auto& c : report.cases) {
    os << std::setw(10) << ("Case " + std::to_string(c.protocol_case))
       << std::setw(10) << hash_cell(c, kRoleDevice) << std::setw(10) << hash_cell(c, kRoleEdge)
       << std::setw(10) << hash_cell(c, kRoleCloud) << c.total_hashes() << "T_h\n";
  }
  os << "\nCommunication cost\n";
  for (const auto& c : report.cases) {
    os << "Case " << c.protocol_case << ": " << c.total_bits() << " bits ("
       << c.messages.size() << " messages:";
    for (std::size_t i = 0; i < c.messages.size(); ++i) {
      os << (i ? " + " : " ") << wire::message_name(c.messages[i].type) << ' '
         << c.messages[i].bits;
    }
    os << ")\n";
  }
  if (!with_timing) return os.str();
  os << "\nMeasured handler time per run, microseconds (informational)\n";
  for (const auto& c : report.cases) {
    os << "Case " << c.protocol_case << " over " << c.runs << " run(s):";
    for (const char* role : {kRoleDevice, kRoleEdge, kRoleCloud}) {
      auto it = c.micros.find(role);
      if (it == c.micros.end()) continue;
      os << ' ' << role << '=' << std::fixed << std::setprecision(2) << it->second;
    }
    os << '\n';
  }
  return os.str();
}

std::string emit_cost_csv(const CostReport& report) {
  std::ostringstream os;
  os << "case,runs,device_hashes,es_hashes,cs_hashes,total_hashes,messages,total_bits,"
        "device_us,es_us,cs_us\n";
  for (const auto& c : report.cases) {
    auto h = [&](const char* role) {
      auto it = c.hashes.find(role);
      return it == c.hashes.end() ? 0 : it->second;
    };
    auto us = [&](const char* role) {
      auto it = c.micros.find(role);
      return it == c.micros.end() ? 0.0 : it->second;
    };
    os << c.protocol_case << ',' << c.runs << ',' << h(kRoleDevice) << ',' << h(kRoleEdge) << ','
       << h(kRoleCloud) << ',' << c.total_hashes() << ',' << c.messages.size() << ','
       << c.total_bits() << ',' << std::fixed << std::setprecision(3) << us(kRoleDevice) << ','
       << us(kRoleEdge) << ',' << us(kRoleCloud) << '\n';
  }
  return os.str();
}

}  // namespace aeaka::sim
