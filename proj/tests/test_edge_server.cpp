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

#include "pki.hpp"
#include "support.hpp"

using namespace aeaka;
using testing::ad;
using testing::code_of;
using testing::ob;
using testing::Pki;

namespace {

struct Flow {
  wire::AuthRequest msg1;
  DeviceAuthSession session;
};

Flow start(Pki& p, std::string_view service) {
  auto tok = p.login();
  auto [m1, sess] = p.device->begin_auth(tok, p.es_pk(), make_ser_req(service), p.rng, p.clock);
  return {m1, std::move(sess)};
}

}  // namespace

TEST_SUITE("edge_server") {

TEST_CASE("service tags") {
  CHECK(service_tag(make_ser_req("video:1080p")) == "video");
  CHECK(service_tag(make_ser_req("storage")) == "storage");
  CHECK(service_tag(make_ser_req("")) == "");
  auto caps = Capabilities::from_json(R"({"video":"local","storage":["CS2","CS1"]})");
  CHECK(caps.serves_locally("video"));
  CHECK_FALSE(caps.serves_locally("storage"));
  CHECK(caps.providers("storage") == std::vector<std::string>{"CS2", "CS1"});
  CHECK(caps.providers("nothing").empty());
  CHECK(Capabilities::from_json(caps.to_json()) == caps);
  CHECK(code_of([] { Capabilities::from_json(R"({"video":42})"); }) ==
        ErrorCode::kInvalidSnapshot);
  CHECK(code_of([] { Capabilities::from_json("[1]"); }) == ErrorCode::kInvalidSnapshot);
}

TEST_CASE("Case 1 response matches the reference and costs 4 hashes") {
  Pki p;
  auto f = start(p, "video");
  HashCounter c;
  EdgeDecision d = [&] {
    HashCountScope s(c);
    return p.es->handle_msg1(f.msg1, p.rng, p.clock);
  }();
  CHECK(c.count() == 4);
  REQUIRE(std::holds_alternative<EdgeCase1>(d));
  const auto& r = std::get<EdgeCase1>(d);
  const auto a = oracle::a_cred(ob(f.msg1.pid), ob(p.es_reg.se));
  const auto x1 = oracle::xor32(ob(f.msg1.m1), a);
  const auto x2 = oracle::xor32(ob(r.msg2.m2), a);
  const auto sk = oracle::sk_case1(a, x1, x2);
  CHECK(ob(r.session_key) == sk);
  CHECK(ob(r.msg2.beta) == oracle::mac_response(sk, x2, r.msg2.t.value));
  CHECK(p.es->session_key(f.msg1.pid) == r.session_key);
  CHECK(p.device->complete_case1(f.session, r.msg2, p.clock) == r.session_key);
}

TEST_CASE("Case 2 relay matches the reference and costs 7 hashes") {
  Pki p;
  auto f = start(p, "storage:bucket-7");
  HashCounter c;
  EdgeDecision d = [&] {
    HashCountScope s(c);
    return p.es->handle_msg1(f.msg1, p.rng, p.clock);
  }();
  CHECK(c.count() == 4);
  REQUIRE(std::holds_alternative<EdgeCase2>(d));
  const auto& r = std::get<EdgeCase2>(d);
  CHECK(r.cid == "CS1");
  CHECK(p.es->open_relays() == 1);
  const auto a = oracle::a_cred(ob(f.msg1.pid), ob(p.es_reg.se));
  const auto x1 = oracle::xor32(ob(f.msg1.m1), a);
  const auto sij = oracle::s_ij(a, x1);
  const auto& e2c = p.es_reg.e2c[0];
  CHECK(r.msg3.pid == e2c.pid);
  CHECK(ob(r.msg3.m3) == oracle::xor32(sij, ob(e2c.credential)));
  CHECK(ob(r.msg3.theta) ==
        oracle::mac_request("storage:bucket-7", ob(e2c.pid), sij, r.msg3.t.value));

  auto cr = p.cs->handle_msg3(r.msg3, p.rng, p.clock);
  HashCounter c4;
  EdgeRelayResult rr = [&] {
    HashCountScope s(c4);
    return p.es->handle_msg4(cr.msg4, r.relay_id, p.clock);
  }();
  CHECK(c4.count() == 3);
  CHECK(p.es->open_relays() == 0);
  const auto sjk = oracle::xor32(ob(cr.msg4.m4), ob(e2c.credential));
  const auto sk = oracle::sk_case2(sij, sjk);
  CHECK(ob(rr.session_key) == sk);
  CHECK(ob(rr.msg5.m5) == oracle::xor32(sjk, a));
  CHECK(ob(rr.msg5.epsilon) == oracle::mac_response(sk, sjk, rr.msg5.t.value));
  CHECK(p.device->complete_case2(f.session, rr.msg5, p.clock) == rr.session_key);
  CHECK(cr.session_key == rr.session_key);
}

TEST_CASE("dispatch depends only on the service tag") {
  Pki p;
  for (int i = 0; i < 40; ++i) {
    const bool local = i % 2 == 0;
    auto f = start(p, local ? "video:" + std::to_string(i) : "storage:" + std::to_string(i));
    auto d = p.es->handle_msg1(f.msg1, p.rng, p.clock);
    CHECK(std::holds_alternative<EdgeCase1>(d) == local);
  }
}

TEST_CASE("no capable cloud server") {
  Pki p;
  auto f = start(p, "music");
  CHECK(code_of([&] { p.es->handle_msg1(f.msg1, p.rng, p.clock); }) == ErrorCode::kNoCapableCs);
  // A provider the edge server was never paired with does not count.
  EdgeServer lonely(p.es->credentials(), Capabilities::from_json(R"({"music":["CS7"]})"),
                    EdgeConfig{});
  auto g = start(p, "music");
  CHECK(code_of([&] { lonely.handle_msg1(g.msg1, p.rng, p.clock); }) ==
        ErrorCode::kNoCapableCs);
}

TEST_CASE("first paired provider in registration order is chosen") {
  SimClock clock(1700000000);
  auto ta = TrustAuthority::setup(3, clock);
  ta->register_cs("CS1");
  ta->register_cs("CS2");
  auto reg = ta->register_es("ES1", {"CS2", "CS1"});
  EdgeServer es({"ES1", reg.se, reg.keys.secret, reg.keys.pub_digest, reg.e2c},
                Capabilities::from_json(R"({"storage":["CS1","CS2"]})"), {});
  auto dreg = ta->register_device("u", "d", wire::hash_fields("u", "pw"), {"ES1"}, 2);
  auto dev = Device::from_registration({dreg.did, dreg.keys.secret, dreg.bundles}, "u", "d",
                                       "pw");
  Rng rng(1);
  auto tok = dev->login("u", "d", "pw");
  auto [m1, s] = dev->begin_auth(tok, reg.keys.pub_digest, make_ser_req("storage"), rng, clock);
  auto d = es.handle_msg1(m1, rng, clock);
  CHECK(std::get<EdgeCase2>(d).cid == "CS2");
}

TEST_CASE("tampered fields fail verification") {
  Pki p;
  auto f = start(p, "video");
  for (int field = 0; field < 4; ++field) {
    auto m = f.msg1;
    switch (field) {
      case 0: m.pid.bytes[5] ^= 0x10; break;
      case 1: m.m1.bytes[0] ^= 0x01; break;
      case 2: m.alpha.bytes[31] ^= 0x80; break;
      default: m.ser_req.push_back('x'); break;
    }
    CHECK(code_of([&] { p.es->handle_msg1(m, p.rng, p.clock); }) == ErrorCode::kAuthFailure);
  }
  // Failed attempts leave no replay-cache entry behind.
  CHECK(std::holds_alternative<EdgeCase1>(p.es->handle_msg1(f.msg1, p.rng, p.clock)));
}

TEST_CASE("replay window") {
  Pki p;
  auto f = start(p, "video");
  p.es->handle_msg1(f.msg1, p.rng, p.clock);
  for (int k = 0; k <= 5; ++k) {
    CHECK(code_of([&] { p.es->handle_msg1(f.msg1, p.rng, p.clock); }) ==
          ErrorCode::kReplayDetected);
    p.clock.advance(1);
  }
  CHECK(code_of([&] { p.es->handle_msg1(f.msg1, p.rng, p.clock); }) ==
        ErrorCode::kStaleTimestamp);
}

TEST_CASE("replay decisions follow prior acceptance") {
  // Property: a message is rejected as a replay iff the same message was
  // accepted before and is still within the window.
  Pki p(21, 2);
  auto tok = p.login();
  std::vector<std::pair<wire::AuthRequest, bool>> pool;
  Rng pick(99);
  for (int step = 0; step < 300; ++step) {
    if (pool.empty() || pick.uniform(3) == 0) {
      auto [m1, s] = p.device->begin_auth(tok, p.es_pk(), make_ser_req("video"), p.rng, p.clock);
      pool.push_back({m1, false});
    }
    auto& [msg, accepted] = pool[pick.uniform(pool.size())];
    const bool is_fresh = fresh(msg.t, p.clock.now(), 5);
    try {
      p.es->handle_msg1(msg, p.rng, p.clock);
      REQUIRE(is_fresh);
      REQUIRE_FALSE(accepted);
      accepted = true;
    } catch (const ProtocolError& e) {
      if (!is_fresh) {
        REQUIRE(e.code() == ErrorCode::kStaleTimestamp);
      } else {
        REQUIRE(accepted);
        REQUIRE(e.code() == ErrorCode::kReplayDetected);
      }
    }
    if (pick.uniform(4) == 0) p.clock.advance(1);
  }
}

TEST_CASE("timestamps outside the window") {
  Pki p;
  auto f = start(p, "video");
  auto old = f.msg1;
  old.t.value -= 6;
  CHECK(code_of([&] { p.es->handle_msg1(old, p.rng, p.clock); }) == ErrorCode::kStaleTimestamp);
  auto future = f.msg1;
  future.t.value += 1;
  CHECK(code_of([&] { p.es->handle_msg1(future, p.rng, p.clock); }) ==
        ErrorCode::kStaleTimestamp);
}

TEST_CASE("relay sessions") {
  Pki p;
  CHECK(code_of([&] { p.es->handle_msg4({}, 12345, p.clock); }) == ErrorCode::kUnknownSession);

  auto f = start(p, "storage");
  auto r = std::get<EdgeCase2>(p.es->handle_msg1(f.msg1, p.rng, p.clock));
  auto cr = p.cs->handle_msg3(r.msg3, p.rng, p.clock);
  auto bad = cr.msg4;
  bad.nu.bytes[0] ^= 1;
  CHECK(code_of([&] { p.es->handle_msg4(bad, r.relay_id, p.clock); }) == ErrorCode::kAuthFailure);
  // Closed on any outcome.
  CHECK(code_of([&] { p.es->handle_msg4(cr.msg4, r.relay_id, p.clock); }) ==
        ErrorCode::kUnknownSession);
  CHECK(p.es->open_relays() == 0);

  auto g = start(p, "storage");
  auto r2 = std::get<EdgeCase2>(p.es->handle_msg1(g.msg1, p.rng, p.clock));
  auto cr2 = p.cs->handle_msg3(r2.msg3, p.rng, p.clock);
  p.clock.advance(6);
  CHECK(code_of([&] { p.es->handle_msg4(cr2.msg4, r2.relay_id, p.clock); }) ==
        ErrorCode::kUnknownSession);
}

TEST_CASE("state and log never hold device secrets once relays close") {
  Pki p(5, 4);
  std::vector<Digest> as;
  const DeviceStore store = p.device->store();
  for (const auto& pid : store.bundles[0].pids) {
    as.push_back(ad(oracle::a_cred(ob(pid), ob(p.es_reg.se))));
  }
  for (int i = 0; i < 10; ++i) {
    auto f = start(p, i % 2 ? "video" : "storage");
    auto d = p.es->handle_msg1(f.msg1, p.rng, p.clock, "device-address");
    if (auto* r = std::get_if<EdgeCase2>(&d)) {
      auto cr = p.cs->handle_msg3(r->msg3, p.rng, p.clock);
      p.es->handle_msg4(cr.msg4, r->relay_id, p.clock);
    }
  }
  const std::string dump = p.es->dump_state();
  std::string log;
  for (const auto& l : p.es->log()) log += l + "\n";
  for (const auto& text : {dump, log}) {
    CHECK_FALSE(testing::contains(text, p.pw));
    CHECK_FALSE(testing::contains(text, ad(oracle::epw(p.uid, p.pw))));
    CHECK_FALSE(testing::contains(text, p.did));
    for (const auto& a : as) CHECK_FALSE(testing::contains(text, a));
  }
  CHECK(p.es->log().size() == 15);  // one line per Msg1, one per Msg4
}

TEST_CASE("dump of an open relay omits its secrets") {
  Pki p;
  auto f = start(p, "storage");
  auto r = std::get<EdgeCase2>(p.es->handle_msg1(f.msg1, p.rng, p.clock));
  REQUIRE(p.es->open_relays() == 1);
  const std::string dump = p.es->dump_state();
  CHECK(testing::contains(dump, "\"record\":\"relay\""));
  const auto a = oracle::a_cred(ob(f.msg1.pid), ob(p.es_reg.se));
  CHECK_FALSE(testing::contains(dump, ad(a)));
  const auto x1 = oracle::xor32(ob(f.msg1.m1), a);
  CHECK_FALSE(testing::contains(dump, ad(oracle::s_ij(a, x1))));
  auto cr = p.cs->handle_msg3(r.msg3, p.rng, p.clock);
  p.es->handle_msg4(cr.msg4, r.relay_id, p.clock);
}

TEST_CASE("snapshot keeps credentials, capabilities and session keys") {
  Pki p;
  auto f = start(p, "video");
  p.es->handle_msg1(f.msg1, p.rng, p.clock);
  const std::string snap = p.es->to_snapshot();
  auto restored = EdgeServer::from_snapshot(snap);
  CHECK(restored->to_snapshot() == snap);
  CHECK(restored->credentials().e2c == p.es->credentials().e2c);
  CHECK(restored->capabilities() == p.es->capabilities());
  CHECK(restored->session_key(f.msg1.pid) == p.es->session_key(f.msg1.pid));
}

}  // TEST_SUITE
