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

#ifndef AEAKA_TRUST_AUTHORITY_HPP_
#define AEAKA_TRUST_AUTHORITY_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "aeaka/crypto.hpp"
#include "aeaka/wire.hpp"

namespace aeaka {

// Stand-in for the distributed key generator. The protocol only ever uses
// h(PK) as a public identifier, so random key material preserves every
// equation.
struct KeyPairStub {
  Digest secret;
  Digest pub;
  Digest pub_digest;  // h(pub)

  static KeyPairStub generate(Rng& rng);
};

struct IdentityRecord {
  Digest did;
  std::string uid;
  std::string device_id;

  bool operator==(const IdentityRecord&) const = default;
};

struct CsRegistration {
  Digest sc;  // h(s || h(PK_k))
  KeyPairStub keys;
};

struct EsRegistration {
  Digest se;  // h(s || h(PK_j))
  KeyPairStub keys;
  std::vector<wire::E2CEntry> e2c;  // (CID, pid_{j,k}, C_{j,k}) per target CS
};

struct DeviceRegistration {
  Digest did;
  KeyPairStub keys;
  std::vector<wire::PseudonymBundle> bundles;
};

inline constexpr std::uint32_t kDefaultPoolSize = 16;

class TrustAuthority {
 public:
  // System setup: draws the master secret s from a seeded stream. `clock`
  // supplies pseudonym timestamps and must outlive the authority.
  static std::unique_ptr<TrustAuthority> setup(std::uint64_t seed, const Clock& clock);
  static std::unique_ptr<TrustAuthority> from_snapshot(std::string_view text,
                                                       const Clock& clock);

  TrustAuthority(const TrustAuthority&) = delete;
  TrustAuthority& operator=(const TrustAuthority&) = delete;

  CsRegistration register_cs(const std::string& cid);
  EsRegistration register_es(const std::string& eid,
                             const std::vector<std::string>& target_cs);
  // `epw` is h(UID || PW), computed by the user; the TA never sees PW.
  DeviceRegistration register_device(const std::string& uid,
                                     const std::string& device_id,
                                     const Digest& epw,
                                     const std::vector<std::string>& target_es,
                                     std::uint32_t pool_size);

  // Reverse lookup of a device pseudonym. ES pseudonyms are a separate
  // namespace and never resolve here.
  std::optional<IdentityRecord> trace(const Digest& pid) const;

  // Registration endpoint over the wire codec: takes an encoded request
  // (CS, ES or device) and returns the encoded response.
  Bytes serve(ByteView request);

  std::string to_snapshot() const;

  // Every public call above increments this; lets callers assert that an
  // authentication phase never touched the TA.
  std::uint64_t operation_count() const { return ops_.load(); }

  std::optional<Digest> cs_public_digest(const std::string& cid) const;
  std::optional<Digest> es_public_digest(const std::string& eid) const;
  std::size_t cs_count() const;
  std::size_t es_count() const;
  std::size_t device_count() const;

  // Exposed for test oracles recomputing credentials.
  const Digest& master_secret() const { return s_; }

 private:
  struct CsEntry {
    Digest pk;
    Digest pk_digest;
  };
  struct EsEntry {
    Digest pk;
    Digest pk_digest;
    std::vector<std::pair<std::string, Digest>> pseudonyms;  // (CID, pid_{j,k})
  };
  struct DeviceEntry {
    std::string uid;
    std::string device_id;
    Digest pk;
    std::vector<std::pair<Digest, std::vector<Digest>>> pseudonyms;  // (h(PK_j), PID)
  };

  TrustAuthority(std::uint64_t seed, const Clock& clock);

  const Clock& clock_;
  Rng rng_;
  Digest s_;
  mutable std::shared_mutex mu_;
  std::map<std::string, CsEntry> cs_;
  std::map<std::string, EsEntry> es_;
  std::map<Digest, DeviceEntry> devices_;
  std::map<Digest, Digest> pid_owner_;  // device pid -> DID
  mutable std::atomic<std::uint64_t> ops_{0};
};

}  // namespace aeaka

#endif  // AEAKA_TRUST_AUTHORITY_HPP_
