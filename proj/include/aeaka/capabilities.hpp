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

// Service capability configuration shared by edge and cloud servers.
//
// File format: one JSON object mapping a service tag to either the string
// "local" (served by this server) or a list of CIDs that provide it, in
// preference order:
//
//   {"video": "local", "storage": ["CS1", "CS2"]}
//
// A SerReq names its service by the bytes before the first ':' (or all of
// it when there is no ':'), e.g. "storage:bucket/42" requests "storage".

#ifndef AEAKA_CAPABILITIES_HPP_
#define AEAKA_CAPABILITIES_HPP_

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "aeaka/crypto.hpp"

namespace aeaka {

std::string service_tag(ByteView ser_req);
Bytes make_ser_req(std::string_view text);

struct Capabilities {
  std::set<std::string> local;
  std::map<std::string, std::vector<std::string>> relay;

  bool serves_locally(std::string_view tag) const;
  // CIDs offering `tag`, preference order; empty when none.
  const std::vector<std::string>& providers(std::string_view tag) const;

  // Throws ProtocolError(kInvalidSnapshot) on a malformed document.
  static Capabilities from_json(std::string_view text);
  std::string to_json() const;

  bool operator==(const Capabilities&) const = default;
};

}  // namespace aeaka

#endif  // AEAKA_CAPABILITIES_HPP_
