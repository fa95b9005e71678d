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

#include "aeaka/sim/attacks.hpp"

#include <algorithm>
#include <functional>

#include "aeaka/capabilities.hpp"

namespace aeaka::sim {

namespace {

using wire::MessageType;

constexpr const char* kMallory = "mallory";

class Battery {
 public:
  Battery(std::string_view name, const WorldConfig& config) : world_(config) {
    report_.name = std::string(name);
    build_canonical_topology(world_);
    world_.add_rogue(kMallory, [](const Envelope&) { return std::vector<Envelope>{}; });
    rng_ = std::make_unique<Rng>(config.seed, "adversary:" + report_.name);
  }

  World& world() { return world_; }
  Rng& rng() { return *rng_; }
  AttackReport& report() { return report_; }

  // Honest run that must succeed for the battery to mean anything.
  AuthRun baseline(const std::string& device, const std::string& edge, std::string_view service,
                   int expected_case) {
    AuthRun run = world_.authenticate(device, edge, service);
    const bool ok = run.keys_agree() && run.protocol_case == expected_case;
    if (!ok) report_.sanity_ok = false;
    report_.lines.push_back("baseline " + device + "->" + edge + " " + std::string(service) +
                            ": " + run.label() + (ok ? "" : " (unexpected)"));
    return run;
  }

  void attempt(const std::string& what, bool rejected, const std::string& detail) {
    ++report_.attempts;
    if (rejected) {
      ++report_.rejected;
    } else {
      report_.breaches.push_back(what + ": " + detail);
    }
    auto& groups = groups_[what];
    ++groups.first;
    if (rejected) ++groups.second;
    if (std::find(order_.begin(), order_.end(), what) == order_.end()) order_.push_back(what);
    last_detail_[what] = detail;
  }

  // Every outcome the delivery caused was a rejection at an honest party.
  void injected(const std::string& what, const std::vector<DeliveryOutcome>& outs) {
    bool rejected = !outs.empty();
    std::string detail = outs.empty() ? "not delivered" : "";
    for (const auto& o : outs) {
      if (o.receiver == kMallory) continue;
      if (o.accepted) rejected = false;
      if (!detail.empty()) detail += ",";
      detail += o.receiver + ":" + o.label();
    }
    attempt(what, rejected, detail);
  }

  void run_attempt(const std::string& what, const AuthRun& run) {
    const bool rejected = !run.completed && run.error.has_value();
    attempt(what, rejected, run.label() + (run.failed_at.empty() ? "" : "@" + run.failed_at));
  }

  AttackReport finish() {
    for (const auto& what : order_) {
      const auto& [n, r] = groups_[what];
      report_.lines.push_back(what + ": " + std::to_string(r) + "/" + std::to_string(n) +
                              " rejected (last " + last_detail_[what] + ")");
    }
    report_.transcript = world_.transcript();
    return std::move(report_);
  }

  std::size_t message(MessageType type) {
    auto idx = world_.last_message(type);
    if (!idx) throw std::logic_error("baseline produced no " +
                                     std::string(wire::message_name(type)));
    return *idx;
  }

  template <typename T>
  T decoded(MessageType type) {
    return std::get<T>(wire::decode(world_.messages()[message(type)].payload));
  }

  std::vector<DeliveryOutcome> inject(const std::string& dst, const wire::Message& msg,
                                      const std::string& why) {
    Envelope env{kMallory, dst, rng_->next_u64(), wire::encode(msg), 0};
    return world_.adversary_inject(std::move(env), why);
  }

 private:
  World world_;
  std::unique_ptr<Rng> rng_;
  AttackReport report_;
  std::map<std::string, std::pair<std::size_t, std::size_t>> groups_;
  std::map<std::string, std::string> last_detail_;
  std::vector<std::string> order_;
};

std::vector<MessageType> case_messages(int protocol_case) {
  if (protocol_case == 1) return {MessageType::kAuthRequest, MessageType::kEdgeResponse};
  return {MessageType::kAuthRequest, MessageType::kCloudRequest, MessageType::kCloudResponse,
          MessageType::kEdgeRelay};
}

std::string name_of(MessageType type) { return std::string(wire::message_name(type)); }

AttackReport replay_battery(const WorldConfig& config) {
  Battery b("replay", config);
  World& w = b.world();
  b.baseline("D1", "ES1", kLocalService, 1);
  const std::vector<std::size_t> case1 = {b.message(MessageType::kAuthRequest),
                                          b.message(MessageType::kEdgeResponse)};
  b.baseline("D1", "ES1", kRelayedService, 2);
  std::vector<std::size_t> captured = case1;
  for (MessageType t : case_messages(2)) captured.push_back(b.message(t));

  auto replay_all = [&](const std::string& phase) {
    for (std::size_t idx : captured) {
      const auto type = static_cast<MessageType>(w.messages()[idx].payload.at(0));
      b.injected("replay " + name_of(type) + " " + phase, w.adversary_replay(idx));
    }
  };
  replay_all("within window");

  // A Msg1 captured on the way to ES1, replayed to another edge server.
  Envelope moved = w.messages()[case1[0]];
  moved.dst = "ES2";
  moved.src = kMallory;
  b.injected("replay Msg1 to another ES", w.adversary_inject(moved, "replay Msg1 to ES2"));

  w.advance_clock(config.window + 1);
  replay_all("after window");

  b.baseline("D1", "ES1", kLocalService, 1);
  b.baseline("D1", "ES1", kRelayedService, 2);
  return b.finish();
}

AttackReport tamper_battery(const WorldConfig& config) {
  Battery b("tamper", config);
  World& w = b.world();
  for (int protocol_case : {1, 2}) {
    const char* service = protocol_case == 1 ? kLocalService : kRelayedService;
    b.baseline("D1", "ES1", service, protocol_case);
    for (MessageType type : case_messages(protocol_case)) {
      const std::size_t size = w.messages()[b.message(type)].payload.size();
      const std::string label = "case" + std::to_string(protocol_case) + " " + name_of(type);
      for (std::size_t offset = 0; offset < size; ++offset) {
        const auto mask = static_cast<std::uint8_t>(1u << (offset % 8));
        w.tamper_in_flight(type, offset, mask);
        b.run_attempt(label + " bit flip", w.authenticate("D1", "ES1", service));
      }
      w.truncate_in_flight(type, size - 1);
      b.run_attempt(label + " truncated", w.authenticate("D1", "ES1", service));
      w.truncate_in_flight(type, 1);
      b.run_attempt(label + " truncated", w.authenticate("D1", "ES1", service));
    }
    b.baseline("D1", "ES1", service, protocol_case);
  }
  return b.finish();
}

AttackReport impersonate_device_battery(const WorldConfig& config) {
  Battery b("impersonate-device", config);
  World& w = b.world();
  Rng& rng = b.rng();
  b.baseline("D1", "ES1", kLocalService, 1);
  const auto seen = b.decoded<wire::AuthRequest>(MessageType::kAuthRequest);

  for (int i = 0; i < 40; ++i) {
    auto msg = forge_msg1(seen.pid, random_nonce(rng), kLocalService, w.clock().now(), rng);
    b.injected("eavesdropped pid, guessed a", b.inject("ES1", msg, "forged Msg1"));
  }
  for (int i = 0; i < 20; ++i) {
    auto msg = forge_msg1(random_nonce(rng), random_nonce(rng), kRelayedService,
                          w.clock().now(), rng);
    b.injected("invented pid, guessed a", b.inject("ES1", msg, "forged Msg1"));
  }
  for (int i = 0; i < 20; ++i) {
    wire::AuthRequest msg = seen;
    msg.t = Timestamp{w.clock().now().value - static_cast<std::uint32_t>(i % 3)};
    msg.m1 = msg.m1 ^ random_nonce(rng);
    b.injected("eavesdropped Msg1, refreshed T and M1", b.inject("ES1", msg, "forged Msg1"));
  }
  // A registered insider (D2) uses its own credential under D1's pseudonym.
  const wire::PseudonymBundle d2 = w.device("D2").store().bundles.front();
  const Digest epw = wire::hash_fields(w.uid("D2"), w.password("D2"));
  for (std::size_t i = 0; i < 20; ++i) {
    const Digest a_d2 = d2.masked[i % d2.masked.size()] ^ epw;
    auto msg = forge_msg1(seen.pid, a_d2, kLocalService, w.clock().now(), rng);
    b.injected("insider credential under victim pid", b.inject("ES1", msg, "forged Msg1"));
  }
  b.baseline("D1", "ES1", kLocalService, 1);
  b.baseline("D2", "ES1", kLocalService, 1);
  return b.finish();
}

AttackReport impersonate_es_battery(const WorldConfig& config) {
  Battery b("impersonate-es", config);
  World& w = b.world();
  Rng& rng = b.rng();
  b.baseline("D1", "ES1", kLocalService, 1);
  const auto old_msg2 = b.decoded<wire::EdgeResponse>(MessageType::kEdgeResponse);
  b.baseline("D1", "ES1", kRelayedService, 2);
  const auto seen_msg3 = b.decoded<wire::CloudRequest>(MessageType::kCloudRequest);

  // Rogue edge server answering the device directly.
  int style = 0;
  w.add_rogue("rogue-es", [&](const Envelope& in) {
    std::vector<Envelope> out;
    auto msg1 = std::get<wire::AuthRequest>(wire::decode(in.payload));
    const Timestamp now = w.clock().now();
    wire::Message reply;
    switch (style) {
      case 0: {
        const Digest a_guess = random_nonce(rng), x2 = random_nonce(rng);
        const Digest sk = wire::hash_fields(a_guess, random_nonce(rng), x2);
        reply = wire::EdgeResponse{a_guess ^ x2, wire::hash_fields(sk, x2, now), now};
        break;
      }
      case 1:
        reply = wire::EdgeResponse{msg1.m1, msg1.alpha, now};
        break;
      case 2:
        reply = old_msg2;
        break;
      default: {
        const Digest s = random_nonce(rng), sk = random_nonce(rng);
        reply = wire::EdgeRelay{s ^ random_nonce(rng), wire::hash_fields(sk, s, now), now};
        break;
      }
    }
    out.push_back(Envelope{"rogue-es", in.src, in.correlation, wire::encode(reply), 0});
    return out;
  });
  const char* styles[] = {"rogue ES forged Msg2", "rogue ES reflected Msg2",
                          "rogue ES stale Msg2", "rogue ES forged Msg5"};
  for (style = 0; style < 4; ++style) {
    for (int i = 0; i < 10; ++i) {
      w.redirect_in_flight(MessageType::kAuthRequest, "rogue-es");
      b.run_attempt(styles[style], w.authenticate("D1", "ES1", kLocalService));
    }
  }
  // A registered but different edge server cannot verify D1's pseudonym.
  for (int i = 0; i < 10; ++i) {
    w.redirect_in_flight(MessageType::kAuthRequest, "ES2");
    b.run_attempt("Msg1 diverted to ES2", w.authenticate("D1", "ES1", kLocalService));
  }
  // Rogue edge server facing the cloud.
  for (int i = 0; i < 20; ++i) {
    const Digest s = random_nonce(rng), c_guess = random_nonce(rng);
    const Timestamp now = w.clock().now();
    const Bytes ser_req = make_ser_req(kRelayedService);
    wire::CloudRequest msg{seen_msg3.pid, s ^ c_guess,
                           wire::hash_fields(ser_req, seen_msg3.pid, s, now), now, ser_req};
    b.injected("forged Msg3 with guessed C", b.inject("CS1", msg, "forged Msg3"));
  }
  // ES2 knows its own C for CS1 and tries to pass as ES1.
  const auto& es2_entry = w.edge("ES2").credentials().e2c.front();
  for (int i = 0; i < 10; ++i) {
    const Digest s = random_nonce(rng);
    const Timestamp now = w.clock().now();
    const Bytes ser_req = make_ser_req(kRelayedService);
    wire::CloudRequest msg{seen_msg3.pid, s ^ es2_entry.credential,
                           wire::hash_fields(ser_req, seen_msg3.pid, s, now), now, ser_req};
    b.injected("ES2 credential under ES1 pseudonym", b.inject("CS1", msg, "forged Msg3"));
  }
  b.baseline("D1", "ES1", kLocalService, 1);
  b.baseline("D1", "ES1", kRelayedService, 2);
  return b.finish();
}

AttackReport impersonate_cs_battery(const WorldConfig& config) {
  Battery b("impersonate-cs", config);
  World& w = b.world();
  Rng& rng = b.rng();
  b.baseline("D1", "ES1", kRelayedService, 2);

  int style = 0;
  const Digest cs2_sc = w.cloud("CS2").credentials().sc;
  w.add_rogue("rogue-cs", [&](const Envelope& in) {
    auto msg3 = std::get<wire::CloudRequest>(wire::decode(in.payload));
    const Timestamp now = w.clock().now();
    wire::CloudResponse reply;
    if (style == 1) {
      reply = {msg3.m3, msg3.theta, now};
    } else {
      const Digest a_guess =
          style == 2 ? wire::hash_fields(msg3.pid, cs2_sc) : random_nonce(rng);
      const Digest s_jk = wire::hash_fields(a_guess, random_nonce(rng));
      const Digest sk = wire::hash_fields(msg3.m3 ^ a_guess, s_jk);
      reply = {s_jk ^ a_guess, wire::hash_fields(sk, s_jk, now), now};
    }
    return std::vector<Envelope>{
        Envelope{"rogue-cs", in.src, in.correlation, wire::encode(reply), 0}};
  });
  const char* styles[] = {"rogue CS forged Msg4", "rogue CS reflected Msg4",
                          "rogue CS using CS2 secret"};
  for (style = 0; style < 3; ++style) {
    for (int i = 0; i < 15; ++i) {
      w.redirect_in_flight(MessageType::kCloudRequest, "rogue-cs");
      b.run_attempt(styles[style], w.authenticate("D1", "ES1", kRelayedService));
    }
  }
  for (int i = 0; i < 10; ++i) {
    w.redirect_in_flight(MessageType::kCloudRequest, "CS2");
    b.run_attempt("Msg3 diverted to CS2", w.authenticate("D1", "ES1", kRelayedService));
  }
  b.baseline("D1", "ES1", kRelayedService, 2);
  return b.finish();
}

AttackReport steal_device_battery(const WorldConfig& config) {
  Battery b("steal-device", config);
  World& w = b.world();
  b.baseline("D1", "ES1", kLocalService, 1);
  StolenStoreResult r = stolen_store_attack(w, "D1", "ES1", 100, b.rng());
  for (std::size_t i = 0; i < r.attempts; ++i) {
    b.attempt("stolen store without password", i >= r.accepted, i < r.accepted ? "accepted" : "ES1:reject:AuthFailure");
  }
  if (!r.insider_accepted) b.report().sanity_ok = false;
  b.report().lines.push_back(std::string("insider control with password: ") +
                             (r.insider_accepted ? "accepted" : "rejected (unexpected)"));
  b.baseline("D1", "ES1", kLocalService, 1);
  return b.finish();
}

}  // namespace

const std::vector<std::string>& attack_names() {
  static const std::vector<std::string> names = {
      "replay", "tamper", "impersonate-device", "impersonate-es", "impersonate-cs",
      "steal-device"};
  return names;
}

bool is_attack_name(std::string_view name) {
  const auto& names = attack_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

AttackReport run_attack(std::string_view name, const WorldConfig& config) {
  if (name == "replay") return replay_battery(config);
  if (name == "tamper") return tamper_battery(config);
  if (name == "impersonate-device") return impersonate_device_battery(config);
  if (name == "impersonate-es") return impersonate_es_battery(config);
  if (name == "impersonate-cs") return impersonate_cs_battery(config);
  if (name == "steal-device") return steal_device_battery(config);
  throw ProtocolError(ErrorCode::kScenarioError, "unknown attack " + std::string(name));
}

wire::AuthRequest forge_msg1(const Digest& pid, const Digest& a, std::string_view ser_req,
                             Timestamp t, Rng& rng) {
  const Nonce x1 = random_nonce(rng);
  const Bytes req = make_ser_req(ser_req);
  return wire::AuthRequest{pid, a ^ x1, wire::hash_fields(req, pid, x1, t), t, req};
}

StolenStoreResult stolen_store_attack(World& world, const std::string& device,
                                      const std::string& edge, std::size_t guesses, Rng& rng) {
  if (!world.has_entity(kMallory)) {
    world.add_rogue(kMallory, [](const Envelope&) { return std::vector<Envelope>{}; });
  }
  const std::string stolen = world.adversary_steal_device(device);
  const DeviceStore store = Device::from_snapshot(stolen)->store();
  const Digest es = world.edge(edge).pk_digest();
  const auto bundle = std::find_if(store.bundles.begin(), store.bundles.end(),
                                   [&](const auto& bn) { return bn.es == es; });
  if (bundle == store.bundles.end() || bundle->pids.empty()) {
    throw ProtocolError(ErrorCode::kScenarioError, device + " holds no pseudonyms for " + edge);
  }

  StolenStoreResult result;
  auto try_a = [&](const Digest& pid, const Digest& a, const std::string& why) {
    auto msg = forge_msg1(pid, a, kLocalService, world.clock().now(), rng);
    auto outs = world.adversary_inject(
        Envelope{kMallory, edge, rng.next_u64(), wire::encode(msg), 0}, why);
    return std::any_of(outs.begin(), outs.end(),
                       [&](const DeliveryOutcome& o) { return o.receiver == edge && o.accepted; });
  };
  for (std::size_t i = 0; i < bundle->pids.size(); ++i) {
    ++result.attempts;
    if (try_a(bundle->pids[i], bundle->masked[i], "stolen b used as a")) ++result.accepted;
  }
  for (std::size_t g = 0; g < guesses; ++g) {
    const std::size_t i = rng.uniform(bundle->pids.size());
    ++result.attempts;
    if (try_a(bundle->pids[i], bundle->masked[i] ^ random_nonce(rng), "stolen b, guessed EPW")) {
      ++result.accepted;
    }
  }
  const Digest epw = wire::hash_fields(world.uid(device), world.password(device));
  result.insider_accepted =
      try_a(bundle->pids.front(), bundle->masked.front() ^ epw, "insider control with password");
  return result;
}

}  // namespace aeaka::sim
