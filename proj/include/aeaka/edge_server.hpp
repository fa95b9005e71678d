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

#ifndef AEAKA_EDGE_SERVER_HPP_
#define AEAKA_EDGE_SERVER_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "aeaka/capabilities.hpp"
#include "aeaka/crypto.hpp"
#include "aeaka/wire.hpp"

namespace aeaka {

struct EdgeConfig {
  std::uint32_t freshness_window = kDefaultFreshnessWindow;
};

struct EdgeCredentials {
  std::string eid;
  Digest se;
  Digest secret_key;
  Digest pk_digest;
  std::vector<wire::E2CEntry> e2c;  // registration order
};

// Served directly: reply to the device.
struct EdgeCase1 {
  wire::EdgeResponse msg2;
  Digest session_key;  // sk_ji
};

// Relayed: forward to `cid`. `relay_id` travels in transport framing and
// must come back with the CS reply.
struct EdgeCase2 {
  wire::CloudRequest msg3;
  std::uint64_t relay_id = 0;
  std::string cid;
};

using EdgeDecision = std::variant<EdgeCase1, EdgeCase2>;

struct EdgeRelayResult {
  wire::EdgeRelay msg5;
  Digest session_key;  // sk'_ki, the device-CS key as seen by the ES
  std::string origin;  // device address recorded at Msg1
};

class EdgeServer {
 public:
  static std::unique_ptr<EdgeServer> from_registration(const std::string& eid,
                                                       const wire::EsRegistrationResponse& reply,
                                                       Capabilities caps, EdgeConfig config = {});
  static std::unique_ptr<EdgeServer> from_snapshot(std::string_view text, EdgeConfig config = {});

  EdgeServer(EdgeCredentials creds, Capabilities caps, EdgeConfig config);

  EdgeServer(const EdgeServer&) = delete;
  EdgeServer& operator=(const EdgeServer&) = delete;

  // Verifies the device, then serves (Case 1) or relays (Case 2) depending
  // only on the SerReq service tag.
  EdgeDecision handle_msg1(const wire::AuthRequest& msg1, Rng& rng, const Clock& clock,
                           std::string_view origin = {});

  // Verifies the CS reply for an open relay and builds Msg5. The relay is
  // closed whatever the outcome.
  EdgeRelayResult handle_msg4(const wire::CloudResponse& msg4, std::uint64_t relay_id,
                              const Clock& clock);

  const std::string& eid() const { return creds_.eid; }
  const Digest& pk_digest() const { return creds_.pk_digest; }
  const Capabilities& capabilities() const { return caps_; }
  const EdgeCredentials& credentials() const { return creds_; }
  std::size_t open_relays() const;
  std::optional<Digest> session_key(const Digest& device_pid) const;
  std::vector<std::string> log() const;

  // Persistent part: credentials, capabilities, case-1 session keys.
  std::string to_snapshot() const;
  // Persistent part plus replay cache, open relays and log. A relay record
  // lists its peer and age only; the a-value and S_ij are never written out.
  std::string dump_state() const;

 private:
  struct Relay {
    Digest a;     // A_{i,j}
    Digest s_ij;  // S_{i,j}
    std::size_t e2c_index = 0;
    std::string origin;
    Timestamp opened;
  };
  using ReplayKey = std::tuple<Digest, std::uint32_t, Digest>;  // (pid, T, alpha)

  void purge_locked(Timestamp now);
  void note(std::string line);

  EdgeCredentials creds_;
  Capabilities caps_;
  EdgeConfig config_;

  mutable std::mutex mu_;
  std::map<ReplayKey, Timestamp> replay_cache_;
  std::map<std::uint64_t, Relay> relays_;
  std::map<Digest, Digest> session_keys_;  // device pid -> sk_ji
  std::vector<std::string> log_;
};

}  // namespace aeaka

#endif  // AEAKA_EDGE_SERVER_HPP_
