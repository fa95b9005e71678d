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

// The simulated deployment: one TA, any number of CSs, ESs and devices, a
// shared simulated clock (with per-entity skew) and a Dolev-Yao channel.
// Single-threaded and deterministic: the same seed and the same calls give
// a byte-identical transcript.

#ifndef AEAKA_SIM_WORLD_HPP_
#define AEAKA_SIM_WORLD_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "aeaka/capabilities.hpp"
#include "aeaka/cloud_server.hpp"
#include "aeaka/device.hpp"
#include "aeaka/edge_server.hpp"
#include "aeaka/error.hpp"
#include "aeaka/sim/channel.hpp"
#include "aeaka/sim/cost.hpp"
#include "aeaka/trust_authority.hpp"

namespace aeaka::sim {

inline constexpr std::uint32_t kDefaultStartTime = 1700000000;

struct WorldConfig {
  std::uint64_t seed = 1;
  std::uint32_t start_time = kDefaultStartTime;
  std::uint32_t window = kDefaultFreshnessWindow;
  std::uint32_t pool_size = kDefaultPoolSize;
  PseudonymMode mode = PseudonymMode::kReuse;
  std::uint32_t lockout_limit = kDefaultLockoutLimit;
};

struct DeliveryOutcome {
  std::size_t message_index = 0;
  std::string receiver;
  std::string message;  // "Msg1".."Msg5", or "?" when undecodable
  bool accepted = false;
  std::optional<ErrorCode> error;

  std::string label() const;  // "accept" or "reject:<Error>"
};

struct AuthRun {
  std::string device;
  std::string edge;
  std::string cloud;        // Case 2 only
  int protocol_case = 0;    // 0 when rejected before the ES decided
  bool completed = false;   // device accepted the final message
  std::optional<ErrorCode> error;
  std::string failed_at;
  std::optional<Digest> device_key;  // sk_ij or sk_ik
  std::optional<Digest> edge_key;    // sk_ji (Case 1) or sk'_ki (Case 2)
  std::optional<Digest> cloud_key;   // sk_ki
  std::optional<Digest> device_pid;
  CaseCost cost;
  std::uint64_t ta_operations = 0;
  std::vector<std::size_t> messages;  // transcript indices

  bool keys_agree() const;
  std::string label() const;  // "case1", "case2" or "reject:<Error>"
};

class World {
 public:
  explicit World(WorldConfig config = {});
  ~World();

  World(const World&) = delete;
  World& operator=(const World&) = delete;

  // Topology. Registration runs over the TA's wire endpoint.
  void add_cloud(const std::string& cid, std::set<std::string> services = {});
  void add_edge(const std::string& eid, const std::vector<std::string>& clouds,
                Capabilities caps);
  void add_device(const std::string& name, const std::string& uid, const std::string& device_id,
                  const std::string& password, const std::vector<std::string>& edges,
                  std::optional<std::uint32_t> pool_size = std::nullopt);

  // Throws ProtocolError on rejection.
  void login(const std::string& device, std::optional<std::string> password = std::nullopt);
  void logout(const std::string& device);
  // One full AKA run. Logs in with the registered password first if the
  // device holds no login token.
  AuthRun authenticate(const std::string& device, const std::string& edge,
                       std::string_view ser_req);
  void update_password(const std::string& device, const std::string& old_pw,
                       const std::string& new_pw);

  // Adversary capabilities. Each returns the receiver outcomes caused by
  // the injected delivery (and anything it triggered).
  std::vector<DeliveryOutcome> adversary_replay(std::size_t index);
  std::vector<DeliveryOutcome> adversary_tamper(std::size_t index, std::size_t offset,
                                                std::uint8_t mask);
  std::vector<DeliveryOutcome> adversary_truncate(std::size_t index, std::size_t length);
  std::vector<DeliveryOutcome> adversary_inject(Envelope env, const std::string& why);
  std::string adversary_steal_device(const std::string& device);
  // One-shot in-flight rewrite/drop of the next message of `type`.
  void tamper_in_flight(wire::MessageType type, std::size_t offset, std::uint8_t mask);
  void truncate_in_flight(wire::MessageType type, std::size_t length);
  void drop_in_flight(wire::MessageType type);
  void redirect_in_flight(wire::MessageType type, const std::string& new_dst);
  // Registers an extra endpoint whose handler the adversary controls.
  using RogueHandler = std::function<std::vector<Envelope>(const Envelope&)>;
  void add_rogue(const std::string& address, RogueHandler handler);

  void set_skew(const std::string& entity, std::int64_t seconds);
  void advance_clock(std::uint32_t seconds);

  SimClock& clock();
  Channel& channel();
  TrustAuthority& ta();
  Device& device(const std::string& name);
  EdgeServer& edge(const std::string& name);
  CloudServer& cloud(const std::string& name);
  Rng& rng(const std::string& entity);
  const Clock& entity_clock(const std::string& entity);
  const WorldConfig& config() const;

  bool has_entity(const std::string& name) const;
  std::vector<std::string> devices() const;
  std::vector<std::string> edges() const;
  std::vector<std::string> clouds() const;

  // Test-known user secrets.
  const std::string& uid(const std::string& device) const;
  const std::string& device_id(const std::string& device) const;
  const std::string& password(const std::string& device) const;

  const std::vector<Envelope>& messages() const;
  const std::vector<DeliveryOutcome>& outcomes() const;
  std::optional<std::size_t> last_message(wire::MessageType type) const;
  // "msg <idx> <src> <dst> <corr> <payload-hex>" and "evt <text>" lines.
  std::string transcript() const;
  // Appends an "evt <text>" line.
  void note(const std::string& text);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Small fixed topology used by the attack batteries, the bench and the CLI:
//   CS1 serves "storage", CS2 serves "analytics";
//   ES1 serves "video" locally, relays "storage" to CS1 and "analytics" to CS2;
//   ES2 serves "video" locally, relays "storage" to CS1;
//   D1 (alice) is registered with ES1 and ES2, D2 (bob) with ES1.
inline constexpr const char* kLocalService = "video";
inline constexpr const char* kRelayedService = "storage";
void build_canonical_topology(World& world);

}  // namespace aeaka::sim

#endif  // AEAKA_SIM_WORLD_HPP_
