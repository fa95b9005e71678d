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

#include "aeaka/capabilities.hpp"

#include <json.hpp>

#include "aeaka/error.hpp"

namespace aeaka {

std::string service_tag(ByteView ser_req) {
  std::string s(ser_req.begin(), ser_req.end());
  return s.substr(0, s.find(':'));
}

Bytes make_ser_req(std::string_view text) { return Bytes(text.begin(), text.end()); }

bool Capabilities::serves_locally(std::string_view tag) const {
  return local.find(std::string(tag)) != local.end();
}

const std::vector<std::string>& Capabilities::providers(std::string_view tag) const {
  static const std::vector<std::string> kNone;
  auto it = relay.find(std::string(tag));
  return it == relay.end() ? kNone : it->second;
}

Capabilities Capabilities::from_json(std::string_view text) {
  auto doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ProtocolError(ErrorCode::kInvalidSnapshot, "capabilities must be a JSON object");
  }
  Capabilities caps;
  for (const auto& [tag, value] : doc.items()) {
    if (value.is_string() && value.get<std::string>() == "local") {
      caps.local.insert(tag);
    } else if (value.is_array()) {
      std::vector<std::string> cids;
      for (const auto& cid : value) {
        if (!cid.is_string()) {
          throw ProtocolError(ErrorCode::kInvalidSnapshot, "CID list for " + tag + " must hold strings");
        }
        cids.push_back(cid.get<std::string>());
      }
      caps.relay[tag] = std::move(cids);
    } else {
      throw ProtocolError(ErrorCode::kInvalidSnapshot,
                          "tag " + tag + " must map to \"local\" or a CID list");
    }
  }
  return caps;
}

std::string Capabilities::to_json() const {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& tag : local) doc[tag] = "local";
  for (const auto& [tag, cids] : relay) doc[tag] = cids;
  return doc.dump();
}

}  // namespace aeaka
