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

#include "aeaka/trust_authority.hpp"

#include <mutex>
#include <set>

#include "aeaka/error.hpp"
#include "aeaka/snapshot.hpp"

namespace aeaka {

using wire::hash_fields;

KeyPairStub KeyPairStub::generate(Rng& rng) {
  KeyPairStub kp;
  kp.secret = random_nonce(rng);
  kp.pub = random_nonce(rng);
  kp.pub_digest = hash_fields(kp.pub);
  return kp;
}

TrustAuthority::TrustAuthority(std::uint64_t seed, const Clock& clock)
    : clock_(clock), rng_(seed, "trust-authority") {}

std::unique_ptr<TrustAuthority> TrustAuthority::setup(std::uint64_t seed,
                                                      const Clock& clock) {
  std::unique_ptr<TrustAuthority> ta(new TrustAuthority(seed, clock));
  ta->s_ = random_nonce(ta->rng_);
  return ta;
}

CsRegistration TrustAuthority::register_cs(const std::string& cid) {
  ++ops_;
  std::unique_lock lock(mu_);
  if (cs_.count(cid) != 0) {
    throw ProtocolError(ErrorCode::kDuplicateRegistration, "CS " + cid);
  }
  CsRegistration out;
  out.keys = KeyPairStub::generate(rng_);
  out.sc = hash_fields(s_, out.keys.pub_digest);
  cs_.emplace(cid, CsEntry{out.keys.pub, out.keys.pub_digest});
  return out;
}

EsRegistration TrustAuthority::register_es(const std::string& eid,
                                           const std::vector<std::string>& target_cs) {
  ++ops_;
  std::unique_lock lock(mu_);
  if (es_.count(eid) != 0) {
    throw ProtocolError(ErrorCode::kDuplicateRegistration, "ES " + eid);
  }
  std::set<std::string> seen;
  for (const auto& cid : target_cs) {
    if (cs_.count(cid) == 0) throw ProtocolError(ErrorCode::kUnknownCs, cid);
    if (!seen.insert(cid).second) {
      throw ProtocolError(ErrorCode::kDuplicateRegistration, "CS listed twice: " + cid);
    }
  }

  EsRegistration out;
  out.keys = KeyPairStub::generate(rng_);
  out.se = hash_fields(s_, out.keys.pub_digest);

  EsEntry entry{out.keys.pub, out.keys.pub_digest, {}};
  for (const auto& cid : target_cs) {
    const CsEntry& cs = cs_.at(cid);
    Digest pid = hash_fields(eid, cs.pk_digest);
    Digest sc = hash_fields(s_, cs.pk_digest);
    Digest c = hash_fields(pid, sc);
    out.e2c.push_back({cid, pid, c});
    entry.pseudonyms.emplace_back(cid, pid);
  }
  es_.emplace(eid, std::move(entry));
  return out;
}

DeviceRegistration TrustAuthority::register_device(
    const std::string& uid, const std::string& device_id, const Digest& epw,
    const std::vector<std::string>& target_es, std::uint32_t pool_size) {
  ++ops_;
  if (pool_size == 0) throw ProtocolError(ErrorCode::kInvalidCount, "pool size must be >= 1");
  std::unique_lock lock(mu_);

  Digest did = hash_fields(uid, device_id, s_);
  if (devices_.count(did) != 0) {
    throw ProtocolError(ErrorCode::kDuplicateRegistration, "device " + device_id);
  }
  std::set<std::string> seen;
  for (const auto& eid : target_es) {
    if (es_.count(eid) == 0) throw ProtocolError(ErrorCode::kUnknownEs, eid);
    if (!seen.insert(eid).second) {
      throw ProtocolError(ErrorCode::kDuplicateRegistration, "ES listed twice: " + eid);
    }
  }

  DeviceRegistration out;
  out.did = did;
  out.keys = KeyPairStub::generate(rng_);
  DeviceEntry entry{uid, device_id, out.keys.pub, {}};

  // Pseudonym timestamps are registration time plus index, so the n hash
  // inputs for one (DID, ES) are always distinct.
  const std::uint32_t t0 = clock_.now().value;
  for (const auto& eid : target_es) {
    const EsEntry& es = es_.at(eid);
    Digest se = hash_fields(s_, es.pk_digest);
    wire::PseudonymBundle bundle;
    bundle.es = es.pk_digest;
    for (std::uint32_t x = 0; x < pool_size; ++x) {
      Timestamp tx{t0 + x};
      Digest pid = hash_fields(did, es.pk_digest, tx);
      Digest a = hash_fields(pid, se);
      bundle.pids.push_back(pid);
      bundle.masked.push_back(epw ^ a);
      secure_wipe(a);
    }
    entry.pseudonyms.emplace_back(es.pk_digest, bundle.pids);
    out.bundles.push_back(std::move(bundle));
  }
  for (const auto& [es, pids] : entry.pseudonyms) {
    for (const auto& pid : pids) pid_owner_.emplace(pid, did);
  }
  devices_.emplace(did, std::move(entry));
  return out;
}

std::optional<IdentityRecord> TrustAuthority::trace(const Digest& pid) const {
  ++ops_;
  std::shared_lock lock(mu_);
  auto it = pid_owner_.find(pid);
  if (it == pid_owner_.end()) return std::nullopt;
  const DeviceEntry& dev = devices_.at(it->second);
  return IdentityRecord{it->second, dev.uid, dev.device_id};
}

Bytes TrustAuthority::serve(ByteView request) {
  wire::Message msg = wire::decode(request);
  if (auto* cs = std::get_if<wire::CsRegistrationRequest>(&msg)) {
    CsRegistration r = register_cs(cs->cid);
    return wire::encode(wire::CsRegistrationResponse{r.sc, r.keys.secret, r.keys.pub_digest});
  }
  if (auto* es = std::get_if<wire::EsRegistrationRequest>(&msg)) {
    EsRegistration r = register_es(es->eid, es->target_cs);
    return wire::encode(
        wire::EsRegistrationResponse{r.se, r.keys.secret, r.keys.pub_digest, r.e2c});
  }
  if (auto* dev = std::get_if<wire::DeviceRegistrationRequest>(&msg)) {
    DeviceRegistration r = register_device(dev->uid, dev->device_id, dev->epw,
                                           dev->target_es, dev->pool_size);
    return wire::encode(wire::DeviceRegistrationResponse{r.did, r.keys.secret, r.bundles});
  }
  throw ProtocolError(ErrorCode::kUnexpectedMessage, "TA accepts registration requests only");
}

std::optional<Digest> TrustAuthority::cs_public_digest(const std::string& cid) const {
  std::shared_lock lock(mu_);
  auto it = cs_.find(cid);
  if (it == cs_.end()) return std::nullopt;
  return it->second.pk_digest;
}

std::optional<Digest> TrustAuthority::es_public_digest(const std::string& eid) const {
  std::shared_lock lock(mu_);
  auto it = es_.find(eid);
  if (it == es_.end()) return std::nullopt;
  return it->second.pk_digest;
}

std::size_t TrustAuthority::cs_count() const {
  std::shared_lock lock(mu_);
  return cs_.size();
}

std::size_t TrustAuthority::es_count() const {
  std::shared_lock lock(mu_);
  return es_.size();
}

std::size_t TrustAuthority::device_count() const {
  std::shared_lock lock(mu_);
  return devices_.size();
}

std::string TrustAuthority::to_snapshot() const {
  using snapshot::Record;
  std::shared_lock lock(mu_);
  std::vector<Record> records;
  records.push_back({{"record", "ta"}, {"s", s_.hex()}, {"rng", rng_.save_state()}});
  for (const auto& [cid, cs] : cs_) {
    records.push_back({{"record", "cs"},
                       {"cid", cid},
                       {"pk", cs.pk.hex()},
                       {"pk_digest", cs.pk_digest.hex()}});
  }
  for (const auto& [eid, es] : es_) {
    Record::array_t pseudonyms;
    for (const auto& [cid, pid] : es.pseudonyms) {
      pseudonyms.push_back({{"cid", cid}, {"pid", pid.hex()}});
    }
    records.push_back({{"record", "es"},
                       {"eid", eid},
                       {"pk", es.pk.hex()},
                       {"pk_digest", es.pk_digest.hex()},
                       {"pseudonyms", pseudonyms}});
  }
  for (const auto& [did, dev] : devices_) {
    Record::array_t pseudonyms;
    for (const auto& [es, pids] : dev.pseudonyms) {
      pseudonyms.push_back({{"es", es.hex()}, {"pids", snapshot::hex_list(pids)}});
    }
    records.push_back({{"record", "device"},
                       {"did", did.hex()},
                       {"uid", dev.uid},
                       {"id", dev.device_id},
                       {"pk", dev.pk.hex()},
                       {"pseudonyms", pseudonyms}});
  }
  return snapshot::write_records(records);
}

std::unique_ptr<TrustAuthority> TrustAuthority::from_snapshot(std::string_view text,
                                                              const Clock& clock) {
  using snapshot::get_digest;
  using snapshot::get_string;
  std::unique_ptr<TrustAuthority> ta(new TrustAuthority(0, clock));
  bool have_header = false;
  for (const auto& rec : snapshot::read_records(text)) {
    const std::string kind = rec["record"].get<std::string>();
    if (kind == "ta") {
      ta->s_ = get_digest(rec, "s");
      ta->rng_.restore_state(get_string(rec, "rng"));
      have_header = true;
    } else if (kind == "cs") {
      ta->cs_.emplace(get_string(rec, "cid"),
                      CsEntry{get_digest(rec, "pk"), get_digest(rec, "pk_digest")});
    } else if (kind == "es") {
      EsEntry es{get_digest(rec, "pk"), get_digest(rec, "pk_digest"), {}};
      for (const auto& p : rec.at("pseudonyms")) {
        es.pseudonyms.emplace_back(get_string(p, "cid"), get_digest(p, "pid"));
      }
      ta->es_.emplace(get_string(rec, "eid"), std::move(es));
    } else if (kind == "device") {
      Digest did = get_digest(rec, "did");
      DeviceEntry dev{get_string(rec, "uid"), get_string(rec, "id"), get_digest(rec, "pk"), {}};
      for (const auto& p : rec.at("pseudonyms")) {
        auto pids = snapshot::get_digests(p, "pids");
        for (const auto& pid : pids) ta->pid_owner_.emplace(pid, did);
        dev.pseudonyms.emplace_back(get_digest(p, "es"), std::move(pids));
      }
      ta->devices_.emplace(did, std::move(dev));
    } else {
      throw ProtocolError(ErrorCode::kInvalidSnapshot, "unknown TA record " + kind);
    }
  }
  if (!have_header) throw ProtocolError(ErrorCode::kInvalidSnapshot, "missing ta record");
  return ta;
}

}  // namespace aeaka
