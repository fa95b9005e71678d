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

#include "aeaka/cloud_server.hpp"

#include "aeaka/error.hpp"
#include "aeaka/snapshot.hpp"

namespace aeaka {

using wire::hash_fields;

std::unique_ptr<CloudServer> CloudServer::from_registration(
    const std::string& cid, const wire::CsRegistrationResponse& reply,
    std::set<std::string> services, CloudConfig config) {
  return std::make_unique<CloudServer>(
      CloudCredentials{cid, reply.sc, reply.secret_key, reply.pk_digest}, std::move(services),
      config);
}

CloudServer::CloudServer(CloudCredentials creds, std::set<std::string> services,
                         CloudConfig config)
    : creds_(std::move(creds)), services_(std::move(services)), config_(config) {
  if (config_.freshness_window == 0) throw std::invalid_argument("window must be positive");
}

void CloudServer::note(std::string line) {
  std::lock_guard lock(mu_);
  log_.push_back(std::move(line));
}

CloudResult CloudServer::handle_msg3(const wire::CloudRequest& msg3, Rng& rng,
                                     const Clock& clock) {
  const Timestamp now = clock.now();
  const std::string pid_hex = msg3.pid.hex();
  if (!fresh(msg3.t, now, config_.freshness_window)) {
    note("reject Msg3 StaleTimestamp pid=" + pid_hex);
    throw ProtocolError(ErrorCode::kStaleTimestamp, "Msg3");
  }
  const ReplayKey key{msg3.pid, msg3.t.value, msg3.theta};
  {
    std::lock_guard lock(mu_);
    for (auto it = replay_cache_.begin(); it != replay_cache_.end();) {
      it = fresh(it->second, now, config_.freshness_window) ? std::next(it)
                                                            : replay_cache_.erase(it);
    }
    if (replay_cache_.count(key) != 0) {
      log_.push_back("reject Msg3 ReplayDetected pid=" + pid_hex);
      throw ProtocolError(ErrorCode::kReplayDetected, "Msg3");
    }
  }

  Digest a_jk = hash_fields(msg3.pid, creds_.sc);
  Digest s_ij = msg3.m3 ^ a_jk;
  Digest theta = hash_fields(msg3.ser_req, msg3.pid, s_ij, msg3.t);
  if (!constant_time_equal(theta, msg3.theta)) {
    secure_wipe(a_jk);
    note("reject Msg3 AuthFailure pid=" + pid_hex);
    throw ProtocolError(ErrorCode::kAuthFailure, "theta mismatch");
  }
  {
    std::lock_guard lock(mu_);
    if (!replay_cache_.emplace(key, msg3.t).second) {
      secure_wipe(a_jk);
      log_.push_back("reject Msg3 ReplayDetected pid=" + pid_hex);
      throw ProtocolError(ErrorCode::kReplayDetected, "Msg3");
    }
  }

  Nonce x3 = random_nonce(rng);
  Digest s_jk = hash_fields(a_jk, x3);
  CloudResult out;
  out.msg4.m4 = s_jk ^ a_jk;
  out.session_key = hash_fields(s_ij, s_jk);
  out.device_handle = s_ij;
  out.msg4.t = clock.now();
  out.msg4.nu = hash_fields(out.session_key, s_jk, out.msg4.t);
  secure_wipe(x3);
  secure_wipe(a_jk);

  std::lock_guard lock(mu_);
  session_keys_[s_ij] = out.session_key;
  log_.push_back("accept Msg3 pid=" + pid_hex);
  return out;
}

std::optional<Digest> CloudServer::session_key(const Digest& device_handle) const {
  std::lock_guard lock(mu_);
  auto it = session_keys_.find(device_handle);
  if (it == session_keys_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> CloudServer::log() const {
  std::lock_guard lock(mu_);
  return log_;
}

namespace {

std::vector<snapshot::Record> persistent_records(const CloudCredentials& creds,
                                                 const std::set<std::string>& services,
                                                 const std::map<Digest, Digest>& keys) {
  using snapshot::Record;
  std::vector<Record> records;
  records.push_back({{"record", "cs"},
                     {"cid", creds.cid},
                     {"sc", creds.sc.hex()},
                     {"sk", creds.secret_key.hex()},
                     {"pk_digest", creds.pk_digest.hex()},
                     {"services", services}});
  for (const auto& [handle, key] : keys) {
    records.push_back({{"record", "session_key"}, {"handle", handle.hex()}, {"key", key.hex()}});
  }
  return records;
}

}  // namespace

std::string CloudServer::to_snapshot() const {
  std::lock_guard lock(mu_);
  return snapshot::write_records(persistent_records(creds_, services_, session_keys_));
}

std::string CloudServer::dump_state() const {
  using snapshot::Record;
  std::lock_guard lock(mu_);
  auto records = persistent_records(creds_, services_, session_keys_);
  for (const auto& [key, t] : replay_cache_) {
    records.push_back({{"record", "replay"},
                       {"pid", std::get<0>(key).hex()},
                       {"t", std::get<1>(key)},
                       {"theta", std::get<2>(key).hex()}});
  }
  for (const auto& line : log_) records.push_back({{"record", "log"}, {"line", line}});
  return snapshot::write_records(records);
}

std::unique_ptr<CloudServer> CloudServer::from_snapshot(std::string_view text,
                                                        CloudConfig config) {
  using snapshot::get_digest;
  CloudCredentials creds;
  std::set<std::string> services;
  std::map<Digest, Digest> keys;
  bool have_header = false;
  for (const auto& rec : snapshot::read_records(text)) {
    const std::string kind = rec["record"].get<std::string>();
    if (kind == "cs") {
      creds.cid = snapshot::get_string(rec, "cid");
      creds.sc = get_digest(rec, "sc");
      creds.secret_key = get_digest(rec, "sk");
      creds.pk_digest = get_digest(rec, "pk_digest");
      if (rec.contains("services")) {
        for (const auto& s : rec["services"]) {
          if (!s.is_string()) throw ProtocolError(ErrorCode::kInvalidSnapshot, "bad service tag");
          services.insert(s.get<std::string>());
        }
      }
      have_header = true;
    } else if (kind == "session_key") {
      keys[get_digest(rec, "handle")] = get_digest(rec, "key");
    } else {
      throw ProtocolError(ErrorCode::kInvalidSnapshot, "unknown CS record " + kind);
    }
  }
  if (!have_header) throw ProtocolError(ErrorCode::kInvalidSnapshot, "missing cs record");
  auto cs = std::make_unique<CloudServer>(std::move(creds), std::move(services), config);
  cs->session_keys_ = std::move(keys);
  return cs;
}

}  // namespace aeaka
