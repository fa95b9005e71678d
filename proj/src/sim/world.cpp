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

#include "aeaka/sim/world.hpp"

#include <chrono>
#include <map>
#include <sstream>

namespace aeaka::sim {

namespace {

enum class Role { kDevice, kEdge, kCloud, kRogue };

std::string corr_hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

struct PendingAuth {
  DeviceAuthSession session;
  std::string edge;
};

struct Node {
  Role role = Role::kRogue;
  std::string name;
  std::unique_ptr<Rng> rng;
  std::unique_ptr<SkewedClock> clock;
  HashCounter hashes;
  double micros = 0;

  // Device.
  std::string uid, device_id, password;
  std::unique_ptr<Device> device;
  std::optional<LoginToken> token;
  std::map<std::uint64_t, PendingAuth> pending;

  std::unique_ptr<EdgeServer> edge;
  std::unique_ptr<CloudServer> cloud;
  World::RogueHandler rogue;
};

struct RelayLink {
  std::uint64_t device_corr = 0;
};

struct RunTrace {
  AuthRun run;
  std::set<std::uint64_t> corrs;
};

}  // namespace

std::string DeliveryOutcome::label() const {
  if (accepted) return "accept";
  return "reject:" + std::string(error ? error_name(*error) : "NoResponse");
}

bool AuthRun::keys_agree() const {
  if (!completed || !device_key) return false;
  if (protocol_case == 1) return edge_key && *edge_key == *device_key;
  if (protocol_case == 2) {
    return edge_key && cloud_key && *edge_key == *device_key && *cloud_key == *device_key;
  }
  return false;
}

std::string AuthRun::label() const {
  if (completed) return "case" + std::to_string(protocol_case);
  return "reject:" + std::string(error ? error_name(*error) : "NoResponse");
}

struct World::Impl {
  WorldConfig config;
  SimClock clock;
  Channel channel;
  std::unique_ptr<TrustAuthority> ta;
  Rng net_rng;
  std::map<std::string, std::unique_ptr<Node>> nodes;
  std::map<std::uint64_t, RelayLink> relays;
  std::vector<Envelope> messages;
  std::vector<DeliveryOutcome> outcomes;
  std::vector<std::string> lines;
  std::size_t channel_log_seen = 0;
  RunTrace* active = nullptr;

  explicit Impl(WorldConfig cfg)
      : config(cfg), clock(cfg.start_time), net_rng(cfg.seed, "network") {
    ta = TrustAuthority::setup(cfg.seed, clock);
  }

  Node& node(const std::string& name, std::optional<Role> role = std::nullopt) {
    auto it = nodes.find(name);
    if (it == nodes.end() || (role && it->second->role != *role)) {
      throw ProtocolError(ErrorCode::kScenarioError, "no such entity: " + name);
    }
    return *it->second;
  }

  Node& add_node(const std::string& name, Role role) {
    if (nodes.count(name) != 0) {
      throw ProtocolError(ErrorCode::kDuplicateRegistration, "entity name in use: " + name);
    }
    auto n = std::make_unique<Node>();
    n->role = role;
    n->name = name;
    n->rng = std::make_unique<Rng>(config.seed, "entity:" + name);
    n->clock = std::make_unique<SkewedClock>(clock, 0);
    Node& ref = *n;
    nodes.emplace(name, std::move(n));
    return ref;
  }

  void event(const std::string& text) { lines.push_back("evt " + text); }

  void sync_channel_log() {
    const auto& log = channel.log();
    for (; channel_log_seen < log.size(); ++channel_log_seen) {
      event("channel " + log[channel_log_seen]);
    }
  }

  void send(const std::string& src, const std::string& dst, std::uint64_t corr,
            const wire::Message& msg) {
    channel.send(Envelope{src, dst, corr, wire::encode(msg), clock.now().value});
  }

  bool in_run(std::uint64_t corr) const { return active && active->corrs.count(corr) != 0; }

  void note_failure(std::uint64_t corr, const std::string& where, ErrorCode code) {
    if (in_run(corr) && !active->run.error) {
      active->run.error = code;
      active->run.failed_at = where;
    }
  }

  void pump(std::vector<DeliveryOutcome>* caused = nullptr) {
    for (;;) {
      auto env = channel.next();
      sync_channel_log();
      if (!env) break;
      if (env->deliver_at > clock.now().value) clock.set(env->deliver_at);
      const std::size_t idx = messages.size();
      messages.push_back(*env);
      lines.push_back("msg " + std::to_string(idx) + " " + env->src + " " + env->dst + " " +
                      corr_hex(env->correlation) + " " + to_hex(env->payload));
      if (in_run(env->correlation)) active->run.messages.push_back(idx);
      DeliveryOutcome out = deliver(*env, idx);
      event("outcome " + std::to_string(idx) + " " + out.receiver + " " + out.message + " " +
            out.label());
      outcomes.push_back(out);
      if (caused) caused->push_back(out);
    }
  }

  DeliveryOutcome deliver(const Envelope& env, std::size_t idx) {
    DeliveryOutcome out;
    out.message_index = idx;
    out.receiver = env.dst;
    out.message = "?";
    auto it = nodes.find(env.dst);
    if (it == nodes.end()) {
      out.error = ErrorCode::kUnknownSession;
      return out;
    }
    Node& n = *it->second;
    HashCountScope scope(n.hashes);
    auto t0 = std::chrono::steady_clock::now();
    try {
      if (n.role == Role::kRogue) {
        for (auto& reply : n.rogue(env)) channel.send(std::move(reply));
        out.accepted = true;
      } else {
        wire::Message msg = wire::decode(env.payload);
        out.message = std::string(wire::message_name(wire::type_of(msg)));
        switch (n.role) {
          case Role::kDevice: on_device(n, env, msg); break;
          case Role::kEdge: on_edge(n, env, msg); break;
          case Role::kCloud: on_cloud(n, env, msg); break;
          case Role::kRogue: break;
        }
        out.accepted = true;
      }
    } catch (const ProtocolError& e) {
      out.error = e.code();
      std::uint64_t corr = env.correlation;
      if (n.role != Role::kDevice) {
        auto rel = relays.find(corr);
        if (rel != relays.end()) corr = rel->second.device_corr;
      }
      note_failure(corr, n.name, e.code());
    }
    n.micros += std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0)
                    .count();
    return out;
  }

  void on_device(Node& n, const Envelope& env, const wire::Message& msg) {
    const auto* msg2 = std::get_if<wire::EdgeResponse>(&msg);
    const auto* msg5 = std::get_if<wire::EdgeRelay>(&msg);
    if (!msg2 && !msg5) throw ProtocolError(ErrorCode::kUnexpectedMessage, "device");
    auto it = n.pending.find(env.correlation);
    if (it == n.pending.end()) throw ProtocolError(ErrorCode::kUnknownSession, "device");
    PendingAuth pending = std::move(it->second);
    n.pending.erase(it);
    Digest key = msg2 ? n.device->complete_case1(pending.session, *msg2, *n.clock)
                      : n.device->complete_case2(pending.session, *msg5, *n.clock);
    if (in_run(env.correlation)) {
      active->run.completed = true;
      active->run.device_key = key;
      active->run.protocol_case = msg2 ? 1 : 2;
    }
  }

  void on_edge(Node& n, const Envelope& env, const wire::Message& msg) {
    if (const auto* msg1 = std::get_if<wire::AuthRequest>(&msg)) {
      EdgeDecision d = n.edge->handle_msg1(*msg1, *n.rng, *n.clock, env.src);
      if (auto* c1 = std::get_if<EdgeCase1>(&d)) {
        if (in_run(env.correlation)) {
          active->run.protocol_case = 1;
          active->run.edge_key = c1->session_key;
        }
        send(n.name, env.src, env.correlation, c1->msg2);
      } else {
        auto& c2 = std::get<EdgeCase2>(d);
        relays[c2.relay_id] = RelayLink{env.correlation};
        if (in_run(env.correlation)) {
          active->run.protocol_case = 2;
          active->run.cloud = c2.cid;
          active->corrs.insert(c2.relay_id);
        }
        send(n.name, c2.cid, c2.relay_id, c2.msg3);
      }
      return;
    }
    if (const auto* msg4 = std::get_if<wire::CloudResponse>(&msg)) {
      EdgeRelayResult r = n.edge->handle_msg4(*msg4, env.correlation, *n.clock);
      std::uint64_t device_corr = relays.at(env.correlation).device_corr;
      relays.erase(env.correlation);
      if (in_run(device_corr)) active->run.edge_key = r.session_key;
      send(n.name, r.origin, device_corr, r.msg5);
      return;
    }
    throw ProtocolError(ErrorCode::kUnexpectedMessage, "edge server");
  }

  void on_cloud(Node& n, const Envelope& env, const wire::Message& msg) {
    const auto* msg3 = std::get_if<wire::CloudRequest>(&msg);
    if (!msg3) throw ProtocolError(ErrorCode::kUnexpectedMessage, "cloud server");
    CloudResult r = n.cloud->handle_msg3(*msg3, *n.rng, *n.clock);
    if (in_run(env.correlation)) active->run.cloud_key = r.session_key;
    send(n.name, env.src, env.correlation, r.msg4);
  }

  void one_shot(const std::string& name, wire::MessageType type,
                std::function<InterceptAction(Envelope&)> action) {
    auto fired = std::make_shared<bool>(false);
    channel.add_interceptor(name, [fired, type, action](Envelope& env) {
      if (*fired || env.payload.empty() || env.payload[0] != static_cast<std::uint8_t>(type)) {
        return InterceptAction::kPass;
      }
      *fired = true;
      return action(env);
    });
    event("adversary arm " + name + " on " + std::string(wire::message_name(type)));
  }
};

World::World(WorldConfig config) : impl_(std::make_unique<Impl>(config)) {}
World::~World() = default;

void World::add_cloud(const std::string& cid, std::set<std::string> services) {
  Node& n = impl_->add_node(cid, Role::kCloud);
  try {
    Bytes reply = impl_->ta->serve(wire::encode(wire::CsRegistrationRequest{cid}));
    auto resp = std::get<wire::CsRegistrationResponse>(wire::decode(reply));
    n.cloud = CloudServer::from_registration(cid, resp, std::move(services),
                                             CloudConfig{impl_->config.window});
  } catch (...) {
    impl_->nodes.erase(cid);
    throw;
  }
  impl_->event("register cs " + cid);
}

void World::add_edge(const std::string& eid, const std::vector<std::string>& clouds,
                     Capabilities caps) {
  Node& n = impl_->add_node(eid, Role::kEdge);
  try {
    Bytes reply = impl_->ta->serve(wire::encode(wire::EsRegistrationRequest{eid, clouds}));
    auto resp = std::get<wire::EsRegistrationResponse>(wire::decode(reply));
    n.edge = EdgeServer::from_registration(eid, resp, std::move(caps),
                                           EdgeConfig{impl_->config.window});
  } catch (...) {
    impl_->nodes.erase(eid);
    throw;
  }
  impl_->event("register es " + eid);
}

void World::add_device(const std::string& name, const std::string& uid,
                       const std::string& device_id, const std::string& password,
                       const std::vector<std::string>& edges,
                       std::optional<std::uint32_t> pool_size) {
  Node& n = impl_->add_node(name, Role::kDevice);
  try {
    auto req = Device::registration_request(uid, device_id, password, edges,
                                            pool_size.value_or(impl_->config.pool_size));
    Bytes reply = impl_->ta->serve(wire::encode(req));
    auto resp = std::get<wire::DeviceRegistrationResponse>(wire::decode(reply));
    DeviceConfig cfg{impl_->config.window, impl_->config.lockout_limit, impl_->config.mode};
    n.device = Device::from_registration(resp, uid, device_id, password, cfg);
  } catch (...) {
    impl_->nodes.erase(name);
    throw;
  }
  n.uid = uid;
  n.device_id = device_id;
  n.password = password;
  impl_->event("register device " + name);
}

void World::login(const std::string& device, std::optional<std::string> password) {
  Node& n = impl_->node(device, Role::kDevice);
  n.token.reset();
  try {
    n.token.emplace(n.device->login(n.uid, n.device_id, password.value_or(n.password)));
  } catch (const ProtocolError& e) {
    impl_->event("login " + device + " reject:" + std::string(error_name(e.code())));
    throw;
  }
  impl_->event("login " + device + " accept");
}

void World::logout(const std::string& device) { impl_->node(device, Role::kDevice).token.reset(); }

AuthRun World::authenticate(const std::string& device, const std::string& edge,
                            std::string_view ser_req) {
  Node& dev = impl_->node(device, Role::kDevice);
  Node& es = impl_->node(edge, Role::kEdge);
  RunTrace trace;
  trace.run.device = device;
  trace.run.edge = edge;

  std::map<std::string, std::pair<std::uint64_t, double>> before;
  for (const auto& [name, n] : impl_->nodes) before[name] = {n->hashes.count(), n->micros};
  const std::uint64_t ta_before = impl_->ta->operation_count();

  if (!dev.token) {
    try {
      login(device);
    } catch (const ProtocolError& e) {
      trace.run.error = e.code();
      trace.run.failed_at = device;
      return trace.run;
    }
  }

  const std::uint64_t corr = impl_->net_rng.next_u64();
  trace.corrs.insert(corr);
  impl_->active = &trace;
  struct Reset {
    RunTrace*& p;
    ~Reset() { p = nullptr; }
  } reset{impl_->active};

  impl_->event("auth " + device + " -> " + edge + " service=" + std::string(ser_req));
  try {
    HashCountScope scope(dev.hashes);
    auto t0 = std::chrono::steady_clock::now();
    auto [msg1, session] = dev.device->begin_auth(*dev.token, es.edge->pk_digest(),
                                                  make_ser_req(ser_req), *dev.rng, *dev.clock);
    dev.micros +=
        std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
    trace.run.device_pid = msg1.pid;
    dev.pending.emplace(corr, PendingAuth{std::move(session), edge});
    impl_->send(device, edge, corr, msg1);
  } catch (const ProtocolError& e) {
    trace.run.error = e.code();
    trace.run.failed_at = device;
    impl_->event("auth " + device + " reject:" + std::string(error_name(e.code())));
    return trace.run;
  }
  impl_->pump();
  dev.pending.erase(corr);

  AuthRun& run = trace.run;
  run.ta_operations = impl_->ta->operation_count() - ta_before;
  run.cost.protocol_case = run.protocol_case;
  auto add_role = [&](const std::string& name, const char* role) {
    const Node& n = *impl_->nodes.at(name);
    run.cost.hashes[role] += n.hashes.count() - before[name].first;
    run.cost.micros[role] += n.micros - before[name].second;
  };
  add_role(device, kRoleDevice);
  add_role(edge, kRoleEdge);
  if (!run.cloud.empty()) add_role(run.cloud, kRoleCloud);
  for (std::size_t idx : run.messages) {
    try {
      wire::Message m = wire::decode(impl_->messages[idx].payload);
      run.cost.messages.push_back({wire::type_of(m), wire::accounted_bits(m)});
    } catch (const ProtocolError&) {
      // Undecodable (tampered) traffic carries no protocol payload.
    }
  }
  impl_->event("auth result " + run.label());
  return run;
}

void World::update_password(const std::string& device, const std::string& old_pw,
                            const std::string& new_pw) {
  Node& n = impl_->node(device, Role::kDevice);
  try {
    n.device->update_password(n.uid, n.device_id, old_pw, new_pw);
  } catch (const ProtocolError& e) {
    impl_->event("update_password " + device + " reject:" + std::string(error_name(e.code())));
    throw;
  }
  n.password = new_pw;
  n.token.reset();
  impl_->event("update_password " + device + " accept");
}

std::vector<DeliveryOutcome> World::adversary_inject(Envelope env, const std::string& why) {
  impl_->event("adversary " + why);
  env.deliver_at = std::max(env.deliver_at, impl_->clock.now().value);
  impl_->channel.inject(std::move(env), why);
  std::vector<DeliveryOutcome> caused;
  impl_->pump(&caused);
  return caused;
}

namespace {

const Envelope& captured(const std::vector<Envelope>& messages, std::size_t index) {
  if (index >= messages.size()) {
    throw ProtocolError(ErrorCode::kScenarioError,
                        "no transcript message " + std::to_string(index));
  }
  return messages[index];
}

}  // namespace

std::vector<DeliveryOutcome> World::adversary_replay(std::size_t index) {
  Envelope env = captured(impl_->messages, index);
  env.deliver_at = 0;
  return adversary_inject(std::move(env), "replay " + std::to_string(index));
}

std::vector<DeliveryOutcome> World::adversary_tamper(std::size_t index, std::size_t offset,
                                                     std::uint8_t mask) {
  Envelope env = captured(impl_->messages, index);
  if (offset >= env.payload.size()) {
    throw ProtocolError(ErrorCode::kScenarioError, "tamper offset beyond message");
  }
  env.payload[offset] ^= mask;
  env.deliver_at = 0;
  return adversary_inject(std::move(env), "tamper " + std::to_string(index) + " offset " +
                                              std::to_string(offset) + " mask " +
                                              std::to_string(mask));
}

std::vector<DeliveryOutcome> World::adversary_truncate(std::size_t index, std::size_t length) {
  Envelope env = captured(impl_->messages, index);
  if (length >= env.payload.size()) {
    throw ProtocolError(ErrorCode::kScenarioError, "truncation must shorten the message");
  }
  env.payload.resize(length);
  env.deliver_at = 0;
  return adversary_inject(std::move(env),
                          "truncate " + std::to_string(index) + " to " + std::to_string(length));
}

std::string World::adversary_steal_device(const std::string& device) {
  impl_->event("adversary steal " + device);
  return impl_->node(device, Role::kDevice).device->to_snapshot();
}

void World::tamper_in_flight(wire::MessageType type, std::size_t offset, std::uint8_t mask) {
  impl_->one_shot("tamper@" + std::to_string(offset) + "^" + std::to_string(mask), type,
                  [offset, mask](Envelope& env) {
                    if (offset < env.payload.size()) env.payload[offset] ^= mask;
                    return InterceptAction::kPass;
                  });
}

void World::truncate_in_flight(wire::MessageType type, std::size_t length) {
  impl_->one_shot("truncate@" + std::to_string(length), type, [length](Envelope& env) {
    if (length < env.payload.size()) env.payload.resize(length);
    return InterceptAction::kPass;
  });
}

void World::drop_in_flight(wire::MessageType type) {
  impl_->one_shot("drop", type, [](Envelope&) { return InterceptAction::kDrop; });
}

void World::redirect_in_flight(wire::MessageType type, const std::string& new_dst) {
  impl_->one_shot("redirect->" + new_dst, type, [new_dst](Envelope& env) {
    env.dst = new_dst;
    return InterceptAction::kPass;
  });
}

void World::add_rogue(const std::string& address, RogueHandler handler) {
  impl_->add_node(address, Role::kRogue).rogue = std::move(handler);
  impl_->event("adversary endpoint " + address);
}

void World::set_skew(const std::string& entity, std::int64_t seconds) {
  impl_->node(entity).clock->set_skew(seconds);
  impl_->event("skew " + entity + " " + std::to_string(seconds));
}

void World::advance_clock(std::uint32_t seconds) {
  impl_->clock.advance(seconds);
  impl_->event("clock +" + std::to_string(seconds) + " = " +
               std::to_string(impl_->clock.now().value));
}

SimClock& World::clock() { return impl_->clock; }
Channel& World::channel() { return impl_->channel; }
TrustAuthority& World::ta() { return *impl_->ta; }
Device& World::device(const std::string& name) {
  return *impl_->node(name, Role::kDevice).device;
}
EdgeServer& World::edge(const std::string& name) { return *impl_->node(name, Role::kEdge).edge; }
CloudServer& World::cloud(const std::string& name) {
  return *impl_->node(name, Role::kCloud).cloud;
}
Rng& World::rng(const std::string& entity) { return *impl_->node(entity).rng; }
const Clock& World::entity_clock(const std::string& entity) { return *impl_->node(entity).clock; }
const WorldConfig& World::config() const { return impl_->config; }

bool World::has_entity(const std::string& name) const { return impl_->nodes.count(name) != 0; }

namespace {

std::vector<std::string> names_with(const std::map<std::string, std::unique_ptr<Node>>& nodes,
                                    Role role) {
  std::vector<std::string> out;
  for (const auto& [name, n] : nodes) {
    if (n->role == role) out.push_back(name);
  }
  return out;
}

}  // namespace

std::vector<std::string> World::devices() const { return names_with(impl_->nodes, Role::kDevice); }
std::vector<std::string> World::edges() const { return names_with(impl_->nodes, Role::kEdge); }
std::vector<std::string> World::clouds() const { return names_with(impl_->nodes, Role::kCloud); }

const std::string& World::uid(const std::string& device) const {
  return impl_->node(device, Role::kDevice).uid;
}
const std::string& World::device_id(const std::string& device) const {
  return impl_->node(device, Role::kDevice).device_id;
}
const std::string& World::password(const std::string& device) const {
  return impl_->node(device, Role::kDevice).password;
}

const std::vector<Envelope>& World::messages() const { return impl_->messages; }
const std::vector<DeliveryOutcome>& World::outcomes() const { return impl_->outcomes; }

std::optional<std::size_t> World::last_message(wire::MessageType type) const {
  const auto& msgs = impl_->messages;
  for (std::size_t i = msgs.size(); i-- > 0;) {
    if (!msgs[i].payload.empty() && msgs[i].payload[0] == static_cast<std::uint8_t>(type)) {
      return i;
    }
  }
  return std::nullopt;
}

void World::note(const std::string& text) { impl_->event(text); }

std::string World::transcript() const {
  std::string out;
  for (const auto& line : impl_->lines) {
    out += line;
    out += '\n';
  }
  return out;
}

void build_canonical_topology(World& world) {
  world.add_cloud("CS1", {"storage"});
  world.add_cloud("CS2", {"analytics"});
  world.add_edge("ES1", {"CS1", "CS2"},
                 Capabilities::from_json(
                     R"({"video":"local","storage":["CS1"],"analytics":["CS2"]})"));
  world.add_edge("ES2", {"CS1"},
                 Capabilities::from_json(R"({"video":"local","storage":["CS1"]})"));
  world.add_device("D1", "alice", "dev-alice-01", "correct horse battery", {"ES1", "ES2"});
  world.add_device("D2", "bob", "dev-bob-01", "hunter2 but longer", {"ES1"});
}

}  // namespace aeaka::sim
