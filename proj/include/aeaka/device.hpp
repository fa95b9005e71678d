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

#ifndef AEAKA_DEVICE_HPP_
#define AEAKA_DEVICE_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aeaka/crypto.hpp"
#include "aeaka/wire.hpp"

namespace aeaka {

enum class PseudonymMode {
  kReuse,      // uniform choice with replacement
  kSingleUse,  // a pseudonym is dropped from the pool once used
};

// "reuse" / "single-use".
std::string_view pseudonym_mode_name(PseudonymMode mode);
std::optional<PseudonymMode> parse_pseudonym_mode(std::string_view text);

inline constexpr std::uint32_t kDefaultLockoutLimit = 3;

struct DeviceConfig {
  std::uint32_t freshness_window = kDefaultFreshnessWindow;
  std::uint32_t lockout_limit = kDefaultLockoutLimit;
  PseudonymMode mode = PseudonymMode::kReuse;
};

enum class PeerKind { kEdge, kCloud };

struct StoredSessionKey {
  PeerKind kind = PeerKind::kEdge;
  Digest key;
  bool operator==(const StoredSessionKey&) const = default;
};

// Everything the device keeps at rest. No PW, EPW or unmasked credential is
// ever part of it.
struct DeviceStore {
  Digest q;    // h(UID || ID || PW), login verifier
  Digest did;
  Digest secret_key;
  std::vector<wire::PseudonymBundle> bundles;  // keyed by h(PK_j)
  std::uint32_t login_attempts = 0;
  // Edge keys are filed under h(PK_j); cloud keys under S''_{i,j}, the one
  // handle the device shares with the anonymous CS.
  std::map<Digest, StoredSessionKey> session_keys;

  bool operator==(const DeviceStore&) const = default;
};

// Proof of a successful login. Holds the entered credentials in memory only
// and wipes them on destruction.
class LoginToken {
 public:
  LoginToken(LoginToken&&) noexcept = default;
  LoginToken& operator=(LoginToken&&) noexcept = default;
  ~LoginToken();

  const std::string& uid() const { return uid_; }

 private:
  friend class Device;
  LoginToken(std::string uid, std::string pw) : uid_(std::move(uid)), pw_(std::move(pw)) {}

  std::string uid_;
  std::string pw_;
};

enum class AuthMode { kPending, kCase1, kCase2, kAborted };

// Ephemeral state between Msg1 and the response. Either completion path may
// fire; whichever does first closes the session.
class DeviceAuthSession {
 public:
  DeviceAuthSession(DeviceAuthSession&&) noexcept = default;
  DeviceAuthSession& operator=(DeviceAuthSession&&) noexcept = default;
  ~DeviceAuthSession();

  const Digest& pid() const { return pid_; }
  const Digest& es() const { return es_; }
  const Bytes& ser_req() const { return ser_req_; }
  std::size_t pseudonym_index() const { return index_; }
  AuthMode mode() const { return mode_; }
  bool live() const { return mode_ == AuthMode::kPending; }

 private:
  friend class Device;
  DeviceAuthSession() = default;

  Digest pid_;
  Digest a_;   // EPW ^ b for the chosen pseudonym
  Digest x1_;
  Digest es_;
  Bytes ser_req_;
  std::size_t index_ = 0;
  AuthMode mode_ = AuthMode::kPending;
};

class Device {
 public:
  // User side of registration: EPW = h(UID || PW) leaves the device, PW
  // does not.
  static wire::DeviceRegistrationRequest registration_request(
      const std::string& uid, const std::string& device_id, const std::string& pw,
      std::vector<std::string> target_es, std::uint32_t pool_size);

  // Completes registration from the TA reply; computes Q.
  static std::unique_ptr<Device> from_registration(
      const wire::DeviceRegistrationResponse& reply, const std::string& uid,
      const std::string& device_id, const std::string& pw, DeviceConfig config = {});

  static std::unique_ptr<Device> from_snapshot(std::string_view text, DeviceConfig config = {});

  Device(DeviceStore store, DeviceConfig config);

  Device(const Device&) = delete;
  Device& operator=(const Device&) = delete;

  // Throws kLockedOut once the failure count reaches the configured limit
  // (before looking at the credentials), kBadCredentials on a Q mismatch.
  LoginToken login(const std::string& uid, const std::string& device_id,
                   const std::string& pw);

  // Builds Msg1 towards the ES identified by `es` = h(PK_j).
  std::pair<wire::AuthRequest, DeviceAuthSession> begin_auth(const LoginToken& token,
                                                             const Digest& es,
                                                             Bytes ser_req, Rng& rng,
                                                             const Clock& clock);

  // Both return the agreed key and close the session; any failure aborts it.
  Digest complete_case1(DeviceAuthSession& session, const wire::EdgeResponse& msg2,
                        const Clock& clock);
  Digest complete_case2(DeviceAuthSession& session, const wire::EdgeRelay& msg5,
                        const Clock& clock);

  // Re-masks every b with the new password and replaces Q. All-or-nothing.
  void update_password(const std::string& uid, const std::string& device_id,
                       const std::string& old_pw, const std::string& new_pw);

  DeviceStore store() const;
  const DeviceConfig& config() const { return config_; }
  std::optional<StoredSessionKey> session_key(const Digest& handle) const;
  std::size_t pool_size(const Digest& es) const;

  std::string to_snapshot() const;

 private:
  void check_login_locked(const std::string& uid, const std::string& device_id,
                          const std::string& pw);
  void close_session(DeviceAuthSession& session);

  mutable std::mutex mu_;
  DeviceStore store_;
  DeviceConfig config_;
};

}  // namespace aeaka

#endif  // AEAKA_DEVICE_HPP_
