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

#include "aeaka/edge_server.hpp"

#include <algorithm>

#include "aeaka/error.hpp"
#include "aeaka/snapshot.hpp"

namespace aeaka {

using wire::hash_fields;

std::unique_ptr<EdgeServer> EdgeServer::from_registration(
    const std::string& eid, const wire::EsRegistrationResponse& reply, Capabilities caps,
    EdgeConfig config) {
  EdgeCredentials creds{eid, reply.se, reply.secret_key, reply.pk_digest, reply.e2c};
  return std::make_unique<EdgeServer>(std::move(creds), std::move(caps), config);
}

EdgeServer::EdgeServer(EdgeCredentials creds, Capabilities caps, EdgeConfig config)
    : creds_(std::move(creds)), caps_(std::move(caps)), config_(config) {
  if (config_.freshness_window == 0) throw std::invalid_argument("window must be positive");
}

void EdgeServer::note(std::string line) {
  std::lock_guard lock(mu_);
  log_.push_back(std::move(line));
}

void EdgeServer::purge_locked(Timestamp now) {
  const std::uint32_t w = config_.freshness_window;
  for (auto it = replay_cache_.begin(); it != replay_cache_.end();) {
    it = fresh(it->second, now, w) ? std::next(it) : replay_cache_.erase(it);
  }
  for (auto it = relays_.begin(); it != relays_.end();) {
    if (fresh(it->second.opened, now, w)) {
      ++it;
    } else {
      secure_wipe(it->second.a);
      it = relays_.erase(it);
    }
  }
}

EdgeDecision EdgeServer::handle_msg1(const wire::AuthRequest& msg1, Rng& rng,
                                     const Clock& clock, std::string_view origin) {
  const Timestamp now = clock.now();
  const std::string pid_hex = msg1.pid.hex();
  if (!fresh(msg1.t, now, config_.freshness_window)) {
    note("reject Msg1 StaleTimestamp pid=" + pid_hex);
    throw ProtocolError(ErrorCode::kStaleTimestamp, "Msg1");
  }
  const ReplayKey key{msg1.pid, msg1.t.value, msg1.alpha};
  {
    std::lock_guard lock(mu_);
    purge_locked(now);
    if (replay_cache_.count(key) != 0) {
      log_.push_back("reject Msg1 ReplayDetected pid=" + pid_hex);
      throw ProtocolError(ErrorCode::kReplayDetected, "Msg1");
    }
  }

  Digest a = hash_fields(msg1.pid, creds_.se);
  Digest x1 = a ^ msg1.m1;
  Digest alpha = hash_fields(msg1.ser_req, msg1.pid, x1, msg1.t);
  if (!constant_time_equal(alpha, msg1.alpha)) {
    secure_wipe(a);
    note("reject Msg1 AuthFailure pid=" + pid_hex);
    throw ProtocolError(ErrorCode::kAuthFailure, "alpha mismatch");
  }
  {
    std::lock_guard lock(mu_);
    if (!replay_cache_.emplace(key, msg1.t).second) {
      secure_wipe(a);
      log_.push_back("reject Msg1 ReplayDetected pid=" + pid_hex);
      throw ProtocolError(ErrorCode::kReplayDetected, "Msg1");
    }
  }

  const std::string tag = service_tag(msg1.ser_req);
  if (caps_.serves_locally(tag)) {
    EdgeCase1 out;
    Nonce x2 = random_nonce(rng);
    out.msg2.m2 = a ^ x2;
    out.session_key = hash_fields(a, x1, x2);
    out.msg2.t = clock.now();
    out.msg2.beta = hash_fields(out.session_key, x2, out.msg2.t);
    secure_wipe(a);
    secure_wipe(x2);
    std::lock_guard lock(mu_);
    session_keys_[msg1.pid] = out.session_key;
    log_.push_back("accept Msg1 case=1 service=" + tag + " pid=" + pid_hex);
    return out;
  }

  // First registered CS that the capability table lists for this tag.
  const auto& wanted = caps_.providers(tag);
  auto entry = std::find_if(creds_.e2c.begin(), creds_.e2c.end(), [&](const wire::E2CEntry& e) {
    return std::find(wanted.begin(), wanted.end(), e.cid) != wanted.end();
  });
  if (entry == creds_.e2c.end()) {
    secure_wipe(a);
    note("reject Msg1 NoCapableCs service=" + tag + " pid=" + pid_hex);
    throw ProtocolError(ErrorCode::kNoCapableCs, tag);
  }

  EdgeCase2 out;
  Relay relay;
  relay.a = a;
  relay.s_ij = hash_fields(a, x1);
  relay.e2c_index = static_cast<std::size_t>(entry - creds_.e2c.begin());
  relay.origin = std::string(origin);
  out.cid = entry->cid;
  out.msg3.pid = entry->pid;
  out.msg3.m3 = relay.s_ij ^ entry->credential;
  out.msg3.t = clock.now();
  out.msg3.theta = hash_fields(msg1.ser_req, entry->pid, relay.s_ij, out.msg3.t);
  out.msg3.ser_req = msg1.ser_req;
  relay.opened = out.msg3.t;
  secure_wipe(a);

  std::lock_guard lock(mu_);
  do {
    out.relay_id = rng.next_u64();
  } while (relays_.count(out.relay_id) != 0);
  relays_.emplace(out.relay_id, std::move(relay));
  log_.push_back("accept Msg1 case=2 service=" + tag + " cs=" + out.cid + " pid=" + pid_hex);
  return out;
}

EdgeRelayResult EdgeServer::handle_msg4(const wire::CloudResponse& msg4, std::uint64_t relay_id,
                                        const Clock& clock) {
  const Timestamp now = clock.now();
  Relay relay;
  {
    std::lock_guard lock(mu_);
    purge_locked(now);
    auto it = relays_.find(relay_id);
    if (it == relays_.end()) {
      log_.push_back("reject Msg4 UnknownSession");
      throw ProtocolError(ErrorCode::kUnknownSession, "no open relay");
    }
    relay = it->second;
    secure_wipe(it->second.a);
    relays_.erase(it);
  }
  struct Wipe {
    Relay& r;
    ~Wipe() { secure_wipe(r.a); }
  } wipe{relay};

  const wire::E2CEntry& entry = creds_.e2c[relay.e2c_index];
  if (!fresh(msg4.t, now, config_.freshness_window)) {
    note("reject Msg4 StaleTimestamp cs=" + entry.cid);
    throw ProtocolError(ErrorCode::kStaleTimestamp, "Msg4");
  }
  // M4 is masked with A_{j,k}, which equals C_{j,k} by construction.
  Digest s_jk = msg4.m4 ^ entry.credential;
  Digest sk = hash_fields(relay.s_ij, s_jk);
  Digest nu = hash_fields(sk, s_jk, msg4.t);
  if (!constant_time_equal(nu, msg4.nu)) {
    note("reject Msg4 AuthFailure cs=" + entry.cid);
    throw ProtocolError(ErrorCode::kAuthFailure, "nu mismatch");
  }

  EdgeRelayResult out;
  out.session_key = sk;
  out.origin = relay.origin;
  out.msg5.m5 = s_jk ^ relay.a;
  out.msg5.t = clock.now();
  out.msg5.epsilon = hash_fields(sk, s_jk, out.msg5.t);
  note("accept Msg4 cs=" + entry.cid);
  return out;
}

std::size_t EdgeServer::open_relays() const {
  std::lock_guard lock(mu_);
  return relays_.size();
}

std::optional<Digest> EdgeServer::session_key(const Digest& device_pid) const {
  std::lock_guard lock(mu_);
  auto it = session_keys_.find(device_pid);
  if (it == session_keys_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> EdgeServer::log() const {
  std::lock_guard lock(mu_);
  return log_;
}

namespace {

std::vector<snapshot::Record> persistent_records(const EdgeCredentials& creds,
                                                 const Capabilities& caps,
                                                 const std::map<Digest, Digest>& keys) {
  using snapshot::Record;
  std::vector<Record> records;
  records.push_back({{"record", "es"},
                     {"eid", creds.eid},
                     {"se", creds.se.hex()},
                     {"sk", creds.secret_key.hex()},
                     {"pk_digest", creds.pk_digest.hex()}});
  for (const auto& e : creds.e2c) {
    records.push_back({{"record", "e2c"},
                       {"cid", e.cid},
                       {"pid", e.pid.hex()},
                       {"c", e.credential.hex()}});
  }
  records.push_back({{"record", "capabilities"}, {"map", Record::parse(caps.to_json())}});
  for (const auto& [pid, key] : keys) {
    records.push_back({{"record", "session_key"}, {"pid", pid.hex()}, {"key", key.hex()}});
  }
  return records;
}

}  // namespace

std::string EdgeServer::to_snapshot() const {
  std::lock_guard lock(mu_);
  return snapshot::write_records(persistent_records(creds_, caps_, session_keys_));
}

std::string EdgeServer::dump_state() const {
  using snapshot::Record;
  std::lock_guard lock(mu_);
  auto records = persistent_records(creds_, caps_, session_keys_);
  for (const auto& [key, t] : replay_cache_) {
    records.push_back({{"record", "replay"},
                       {"pid", std::get<0>(key).hex()},
                       {"t", std::get<1>(key)},
                       {"alpha", std::get<2>(key).hex()}});
  }
  for (const auto& [id, relay] : relays_) {
    records.push_back({{"record", "relay"},
                       {"id", id},
                       {"cid", creds_.e2c[relay.e2c_index].cid},
                       {"origin", relay.origin},
                       {"opened", relay.opened.value}});
  }
  for (const auto& line : log_) records.push_back({{"record", "log"}, {"line", line}});
  return snapshot::write_records(records);
}

std::unique_ptr<EdgeServer> EdgeServer::from_snapshot(std::string_view text, EdgeConfig config) {
  using snapshot::get_digest;
  using snapshot::get_string;
  EdgeCredentials creds;
  Capabilities caps;
  std::map<Digest, Digest> keys;
  bool have_header = false;
  for (const auto& rec : snapshot::read_records(text)) {
    const std::string kind = rec["record"].get<std::string>();
    if (kind == "es") {
      creds.eid = get_string(rec, "eid");
      creds.se = get_digest(rec, "se");
      creds.secret_key = get_digest(rec, "sk");
      creds.pk_digest = get_digest(rec, "pk_digest");
      have_header = true;
    } else if (kind == "e2c") {
      creds.e2c.push_back({get_string(rec, "cid"), get_digest(rec, "pid"), get_digest(rec, "c")});
    } else if (kind == "capabilities") {
      caps = Capabilities::from_json(rec.at("map").dump());
    } else if (kind == "session_key") {
      keys[get_digest(rec, "pid")] = get_digest(rec, "key");
    } else {
      throw ProtocolError(ErrorCode::kInvalidSnapshot, "unknown ES record " + kind);
    }
  }
  if (!have_header) throw ProtocolError(ErrorCode::kInvalidSnapshot, "missing es record");
  auto es = std::make_unique<EdgeServer>(std::move(creds), std::move(caps), config);
  es->session_keys_ = std::move(keys);
  return es;
}

}  // namespace aeaka
