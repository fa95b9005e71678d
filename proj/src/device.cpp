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

#include "aeaka/device.hpp"

#include <algorithm>

#include "aeaka/error.hpp"
#include "aeaka/snapshot.hpp"

namespace aeaka {

using wire::hash_fields;

namespace {

Digest password_digest(const std::string& uid, const std::string& pw) {
  return hash_fields(uid, pw);
}

Digest login_verifier(const std::string& uid, const std::string& device_id,
                      const std::string& pw) {
  return hash_fields(uid, device_id, pw);
}

}  // namespace

LoginToken::~LoginToken() {
  secure_wipe(std::span<std::uint8_t>(reinterpret_cast<std::uint8_t*>(pw_.data()), pw_.size()));
}

DeviceAuthSession::~DeviceAuthSession() {
  secure_wipe(a_);
  secure_wipe(x1_);
}

std::string_view pseudonym_mode_name(PseudonymMode mode) {
  return mode == PseudonymMode::kReuse ? "reuse" : "single-use";
}

std::optional<PseudonymMode> parse_pseudonym_mode(std::string_view text) {
  if (text == "reuse") return PseudonymMode::kReuse;
  if (text == "single-use") return PseudonymMode::kSingleUse;
  return std::nullopt;
}

wire::DeviceRegistrationRequest Device::registration_request(
    const std::string& uid, const std::string& device_id, const std::string& pw,
    std::vector<std::string> target_es, std::uint32_t pool_size) {
  return {uid, device_id, password_digest(uid, pw), std::move(target_es), pool_size};
}

std::unique_ptr<Device> Device::from_registration(const wire::DeviceRegistrationResponse& reply,
                                                  const std::string& uid,
                                                  const std::string& device_id,
                                                  const std::string& pw, DeviceConfig config) {
  DeviceStore store;
  store.q = login_verifier(uid, device_id, pw);
  store.did = reply.did;
  store.secret_key = reply.secret_key;
  store.bundles = reply.bundles;
  for (const auto& b : store.bundles) {
    if (b.pids.size() != b.masked.size()) {
      throw ProtocolError(ErrorCode::kMalformedMessage, "pseudonym/credential count mismatch");
    }
  }
  return std::make_unique<Device>(std::move(store), config);
}

Device::Device(DeviceStore store, DeviceConfig config)
    : store_(std::move(store)), config_(config) {
  if (config_.freshness_window == 0 || config_.lockout_limit == 0) {
    throw std::invalid_argument("device window and lockout limit must be positive");
  }
}

void Device::check_login_locked(const std::string& uid, const std::string& device_id,
                                const std::string& pw) {
  if (store_.login_attempts >= config_.lockout_limit) {
    throw ProtocolError(ErrorCode::kLockedOut, "too many failed logins");
  }
  if (!constant_time_equal(login_verifier(uid, device_id, pw), store_.q)) {
    ++store_.login_attempts;
    throw ProtocolError(ErrorCode::kBadCredentials);
  }
  store_.login_attempts = 0;
}

LoginToken Device::login(const std::string& uid, const std::string& device_id,
                         const std::string& pw) {
  std::lock_guard lock(mu_);
  check_login_locked(uid, device_id, pw);
  return LoginToken(uid, pw);
}

std::pair<wire::AuthRequest, DeviceAuthSession> Device::begin_auth(const LoginToken& token,
                                                                   const Digest& es,
                                                                   Bytes ser_req, Rng& rng,
                                                                   const Clock& clock) {
  std::lock_guard lock(mu_);
  auto bundle = std::find_if(store_.bundles.begin(), store_.bundles.end(),
                             [&](const wire::PseudonymBundle& b) { return b.es == es; });
  if (bundle == store_.bundles.end()) {
    throw ProtocolError(ErrorCode::kUnknownEs, "no pseudonyms for ES " + es.hex());
  }
  if (bundle->pids.empty()) {
    throw ProtocolError(ErrorCode::kEmptyPseudonymPool, "re-registration required");
  }

  Digest epw = password_digest(token.uid_, token.pw_);
  DeviceAuthSession session;
  session.index_ = static_cast<std::size_t>(rng.uniform(bundle->pids.size()));
  session.pid_ = bundle->pids[session.index_];
  session.a_ = epw ^ bundle->masked[session.index_];
  secure_wipe(epw);
  session.x1_ = random_nonce(rng);
  session.es_ = es;
  session.ser_req_ = ser_req;

  if (config_.mode == PseudonymMode::kSingleUse) {
    bundle->pids.erase(bundle->pids.begin() + static_cast<std::ptrdiff_t>(session.index_));
    bundle->masked.erase(bundle->masked.begin() + static_cast<std::ptrdiff_t>(session.index_));
  }

  wire::AuthRequest msg1;
  msg1.pid = session.pid_;
  msg1.m1 = session.a_ ^ session.x1_;
  msg1.t = clock.now();
  msg1.alpha = hash_fields(ser_req, msg1.pid, session.x1_, msg1.t);
  msg1.ser_req = std::move(ser_req);
  return {std::move(msg1), std::move(session)};
}

void Device::close_session(DeviceAuthSession& session) {
  session.mode_ = AuthMode::kAborted;
  secure_wipe(session.a_);
  secure_wipe(session.x1_);
}

Digest Device::complete_case1(DeviceAuthSession& session, const wire::EdgeResponse& msg2,
                              const Clock& clock) {
  if (!session.live()) throw ProtocolError(ErrorCode::kUnknownSession, "session closed");
  if (!fresh(msg2.t, clock.now(), config_.freshness_window)) {
    close_session(session);
    throw ProtocolError(ErrorCode::kStaleTimestamp, "Msg2");
  }
  Digest x2 = msg2.m2 ^ session.a_;
  Digest sk = hash_fields(session.a_, session.x1_, x2);
  Digest beta = hash_fields(sk, x2, msg2.t);
  if (!constant_time_equal(beta, msg2.beta)) {
    close_session(session);
    throw ProtocolError(ErrorCode::kAuthFailure, "beta mismatch");
  }
  {
    std::lock_guard lock(mu_);
    store_.session_keys[session.es_] = {PeerKind::kEdge, sk};
  }
  close_session(session);
  session.mode_ = AuthMode::kCase1;
  return sk;
}

Digest Device::complete_case2(DeviceAuthSession& session, const wire::EdgeRelay& msg5,
                              const Clock& clock) {
  if (!session.live()) throw ProtocolError(ErrorCode::kUnknownSession, "session closed");
  if (!fresh(msg5.t, clock.now(), config_.freshness_window)) {
    close_session(session);
    throw ProtocolError(ErrorCode::kStaleTimestamp, "Msg5");
  }
  Digest s_ij = hash_fields(session.a_, session.x1_);
  Digest s_jk = msg5.m5 ^ session.a_;
  Digest sk = hash_fields(s_ij, s_jk);
  Digest epsilon = hash_fields(sk, s_jk, msg5.t);
  if (!constant_time_equal(epsilon, msg5.epsilon)) {
    close_session(session);
    throw ProtocolError(ErrorCode::kAuthFailure, "epsilon mismatch");
  }
  {
    std::lock_guard lock(mu_);
    store_.session_keys[s_ij] = {PeerKind::kCloud, sk};
  }
  close_session(session);
  session.mode_ = AuthMode::kCase2;
  return sk;
}

void Device::update_password(const std::string& uid, const std::string& device_id,
                             const std::string& old_pw, const std::string& new_pw) {
  std::lock_guard lock(mu_);
  check_login_locked(uid, device_id, old_pw);
  // b' = EPW ^ b ^ EPW'; the unmasked a-values never change.
  const Digest delta = password_digest(uid, old_pw) ^ password_digest(uid, new_pw);
  auto bundles = store_.bundles;
  for (auto& bundle : bundles) {
    for (auto& b : bundle.masked) b = b ^ delta;
  }
  Digest q = login_verifier(uid, device_id, new_pw);
  store_.bundles = std::move(bundles);
  store_.q = q;
}

DeviceStore Device::store() const {
  std::lock_guard lock(mu_);
  return store_;
}

std::optional<StoredSessionKey> Device::session_key(const Digest& handle) const {
  std::lock_guard lock(mu_);
  auto it = store_.session_keys.find(handle);
  if (it == store_.session_keys.end()) return std::nullopt;
  return it->second;
}

std::size_t Device::pool_size(const Digest& es) const {
  std::lock_guard lock(mu_);
  for (const auto& b : store_.bundles) {
    if (b.es == es) return b.pids.size();
  }
  return 0;
}

std::string Device::to_snapshot() const {
  using snapshot::Record;
  std::lock_guard lock(mu_);
  std::vector<Record> records;
  records.push_back({{"record", "device"},
                     {"q", store_.q.hex()},
                     {"did", store_.did.hex()},
                     {"sk", store_.secret_key.hex()},
                     {"login_attempts", store_.login_attempts}});
  for (const auto& b : store_.bundles) {
    records.push_back({{"record", "bundle"},
                       {"es", b.es.hex()},
                       {"pids", snapshot::hex_list(b.pids)},
                       {"b", snapshot::hex_list(b.masked)}});
  }
  for (const auto& [handle, entry] : store_.session_keys) {
    records.push_back({{"record", "session_key"},
                       {"handle", handle.hex()},
                       {"peer", entry.kind == PeerKind::kEdge ? "edge" : "cloud"},
                       {"key", entry.key.hex()}});
  }
  return snapshot::write_records(records);
}

std::unique_ptr<Device> Device::from_snapshot(std::string_view text, DeviceConfig config) {
  using snapshot::get_digest;
  DeviceStore store;
  bool have_header = false;
  for (const auto& rec : snapshot::read_records(text)) {
    const std::string kind = rec["record"].get<std::string>();
    if (kind == "device") {
      store.q = get_digest(rec, "q");
      store.did = get_digest(rec, "did");
      store.secret_key = get_digest(rec, "sk");
      store.login_attempts = static_cast<std::uint32_t>(snapshot::get_u64(rec, "login_attempts"));
      have_header = true;
    } else if (kind == "bundle") {
      wire::PseudonymBundle b{get_digest(rec, "es"), snapshot::get_digests(rec, "pids"),
                              snapshot::get_digests(rec, "b")};
      if (b.pids.size() != b.masked.size()) {
        throw ProtocolError(ErrorCode::kInvalidSnapshot, "bundle lists differ in length");
      }
      store.bundles.push_back(std::move(b));
    } else if (kind == "session_key") {
      const std::string peer = snapshot::get_string(rec, "peer");
      if (peer != "edge" && peer != "cloud") {
        throw ProtocolError(ErrorCode::kInvalidSnapshot, "bad session key peer " + peer);
      }
      store.session_keys[get_digest(rec, "handle")] = {
          peer == "edge" ? PeerKind::kEdge : PeerKind::kCloud, get_digest(rec, "key")};
    } else {
      throw ProtocolError(ErrorCode::kInvalidSnapshot, "unknown device record " + kind);
    }
  }
  if (!have_header) throw ProtocolError(ErrorCode::kInvalidSnapshot, "missing device record");
  return std::make_unique<Device>(std::move(store), config);
}

}  // namespace aeaka
