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

#include <doctest.h>

#include <set>

#include "pki.hpp"
#include "support.hpp"

using namespace aeaka;
using testing::ad;
using testing::code_of;
using testing::ob;
using testing::Pki;

namespace {

EdgeCase2 relay(Pki& p, std::string_view service = "storage") {
  auto tok = p.login();
  auto [m1, s] = p.device->begin_auth(tok, p.es_pk(), make_ser_req(service), p.rng, p.clock);
  return std::get<EdgeCase2>(p.es->handle_msg1(m1, p.rng, p.clock));
}

}  // namespace

TEST_SUITE("cloud_server") {

TEST_CASE("Msg4 matches the reference and costs 5 hashes") {
  Pki p;
  auto r = relay(p);
  HashCounter c;
  CloudResult cr = [&] {
    HashCountScope s(c);
    return p.cs->handle_msg3(r.msg3, p.rng, p.clock);
  }();
  CHECK(c.count() == 5);
  const auto a_jk = oracle::c_jk(ob(r.msg3.pid), ob(p.cs_reg.sc));
  const auto sij = oracle::xor32(ob(r.msg3.m3), a_jk);
  const auto sjk = oracle::xor32(ob(cr.msg4.m4), a_jk);
  const auto sk = oracle::sk_case2(sij, sjk);
  CHECK(ob(cr.device_handle) == sij);
  CHECK(ob(cr.session_key) == sk);
  CHECK(ob(cr.msg4.nu) == oracle::mac_response(sk, sjk, cr.msg4.t.value));
  CHECK(p.cs->session_key(cr.device_handle) == cr.session_key);
}

TEST_CASE("A_jk equals the edge server's C_jk") {
  Pki p;
  for (int i = 0; i < 20; ++i) {
    auto r = relay(p);
    auto cr = p.cs->handle_msg3(r.msg3, p.rng, p.clock);
    const auto a_jk = oracle::c_jk(ob(r.msg3.pid), ob(p.cs_reg.sc));
    // xor(M4, C_jk) as the edge server computes it is S_jk.
    const auto sjk_at_es = cr.msg4.m4 ^ p.es_reg.e2c[0].credential;
    CHECK(ob(sjk_at_es) == oracle::xor32(ob(cr.msg4.m4), a_jk));
    p.es->handle_msg4(cr.msg4, r.relay_id, p.clock);
  }
}

TEST_CASE("forged or tampered Msg3 is rejected") {
  Pki p;
  auto r = relay(p);
  SUBCASE("pseudonym never issued") {
    auto m = r.msg3;
    m.pid.bytes[0] ^= 1;
    CHECK(code_of([&] { p.cs->handle_msg3(m, p.rng, p.clock); }) == ErrorCode::kAuthFailure);
  }
  SUBCASE("masked value") {
    auto m = r.msg3;
    m.m3.bytes[9] ^= 4;
    CHECK(code_of([&] { p.cs->handle_msg3(m, p.rng, p.clock); }) == ErrorCode::kAuthFailure);
  }
  SUBCASE("service request") {
    auto m = r.msg3;
    m.ser_req = make_ser_req("storage:other");
    CHECK(code_of([&] { p.cs->handle_msg3(m, p.rng, p.clock); }) == ErrorCode::kAuthFailure);
  }
  SUBCASE("stale") {
    p.clock.advance(6);
    CHECK(code_of([&] { p.cs->handle_msg3(r.msg3, p.rng, p.clock); }) ==
          ErrorCode::kStaleTimestamp);
  }
  SUBCASE("replay") {
    p.cs->handle_msg3(r.msg3, p.rng, p.clock);
    CHECK(code_of([&] { p.cs->handle_msg3(r.msg3, p.rng, p.clock); }) ==
          ErrorCode::kReplayDetected);
  }
}

TEST_CASE("two honest relays in the same second are both accepted") {
  Pki p;
  auto r1 = relay(p);
  auto r2 = relay(p);
  CHECK(r1.msg3.pid == r2.msg3.pid);
  CHECK(r1.msg3.t == r2.msg3.t);
  CHECK_NOTHROW(p.cs->handle_msg3(r1.msg3, p.rng, p.clock));
  CHECK_NOTHROW(p.cs->handle_msg3(r2.msg3, p.rng, p.clock));
}

TEST_CASE("long-term state alone cannot reproduce a past session key") {
  Pki p;
  auto r = relay(p);
  auto cr = p.cs->handle_msg3(r.msg3, p.rng, p.clock);
  // Everything disclosed after the run: SC, A_jk, pid_jk, the stored
  // handle S'_ij, the CS secret key and the TA-issued values.
  const Digest sc = p.cs->credentials().sc;
  const Digest a_jk = wire::hash_fields(r.msg3.pid, sc);
  const std::vector<Digest> known = {sc, a_jk, r.msg3.pid, cr.device_handle,
                                     p.cs->credentials().secret_key,
                                     p.cs->credentials().pk_digest};
  std::set<Digest> derivable(known.begin(), known.end());
  for (const auto& x : known) {
    for (const auto& y : known) {
      derivable.insert(x ^ y);
      derivable.insert(wire::hash_fields(x, y));
      derivable.insert(wire::hash_fields(x));
      for (const auto& z : known) derivable.insert(wire::hash_fields(x, y, z));
    }
  }
  std::set<Digest> second = derivable;
  for (const auto& x : derivable) {
    for (const auto& y : known) {
      second.insert(wire::hash_fields(x, y));
      second.insert(wire::hash_fields(y, x));
      second.insert(x ^ y);
    }
  }
  CHECK(second.count(cr.session_key) == 0);
}

TEST_CASE("long-term secret plus the transcript does recover the key") {
  // Documents the limit of the forward-secrecy property above: SC together
  // with the recorded Msg3 and Msg4 unmasks both key inputs.
  Pki p;
  auto r = relay(p);
  auto cr = p.cs->handle_msg3(r.msg3, p.rng, p.clock);
  const Digest a_jk = wire::hash_fields(r.msg3.pid, p.cs->credentials().sc);
  const Digest sk = wire::hash_fields(r.msg3.m3 ^ a_jk, cr.msg4.m4 ^ a_jk);
  CHECK(sk == cr.session_key);
}

TEST_CASE("state and log never hold device identifiers") {
  Pki p(5, 4);
  std::set<Digest> device_pids;
  const DeviceStore store = p.device->store();
  for (const auto& pid : store.bundles[0].pids) device_pids.insert(pid);
  for (int i = 0; i < 8; ++i) {
    auto r = relay(p);
    auto cr = p.cs->handle_msg3(r.msg3, p.rng, p.clock);
    p.es->handle_msg4(cr.msg4, r.relay_id, p.clock);
  }
  std::string text = p.cs->dump_state();
  for (const auto& l : p.cs->log()) text += l + "\n";
  for (const auto& pid : device_pids) CHECK_FALSE(testing::contains(text, pid));
  CHECK_FALSE(testing::contains(text, p.did));
  CHECK_FALSE(testing::contains(text, p.pw));
  for (const auto& pid : device_pids) {
    CHECK_FALSE(testing::contains(text, ad(oracle::a_cred(ob(pid), ob(p.es_reg.se)))));
  }
}

TEST_CASE("Msg4 never carries SC") {
  Pki p;
  for (int i = 0; i < 10; ++i) {
    auto r = relay(p);
    auto cr = p.cs->handle_msg3(r.msg3, p.rng, p.clock);
    const Bytes b = wire::encode(cr.msg4);
    CHECK_FALSE(testing::contains(std::string(b.begin(), b.end()), p.cs_reg.sc));
  }
}

TEST_CASE("snapshot round trip") {
  Pki p;
  auto r = relay(p);
  auto cr = p.cs->handle_msg3(r.msg3, p.rng, p.clock);
  const std::string snap = p.cs->to_snapshot();
  auto restored = CloudServer::from_snapshot(snap);
  CHECK(restored->to_snapshot() == snap);
  CHECK(restored->services() == std::set<std::string>{"storage"});
  CHECK(restored->session_key(cr.device_handle) == cr.session_key);
}

}  // TEST_SUITE
