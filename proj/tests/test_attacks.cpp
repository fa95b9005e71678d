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

#include "aeaka/sim/attacks.hpp"
#include "pki.hpp"

using namespace aeaka;
using namespace aeaka::sim;

TEST_SUITE("attacks") {

TEST_CASE("every battery rejects every attempt") {
  for (std::uint64_t seed : {1, 2}) {
    for (const auto& name : attack_names()) {
      CAPTURE(name);
      CAPTURE(seed);
      const AttackReport r = run_attack(name, WorldConfig{.seed = seed});
      CHECK(r.sanity_ok);
      CHECK(r.attempts > 0);
      CHECK(r.rejected == r.attempts);
      CHECK(r.breaches.empty());
      CHECK(r.passed());
    }
  }
}

TEST_CASE("battery names") {
  CHECK(attack_names().size() == 6);
  CHECK(is_attack_name("replay"));
  CHECK_FALSE(is_attack_name("scenarios/replay.json"));
  CHECK(testing::code_of([] { run_attack("nope", {}); }) == ErrorCode::kScenarioError);
}

TEST_CASE("stolen store without the password") {
  World w(WorldConfig{.seed = 11});
  build_canonical_topology(w);
  Rng rng(11, "thief");
  const auto r = stolen_store_attack(w, "D1", "ES1", 100, rng);
  CHECK(r.attempts >= 100);
  CHECK(r.accepted == 0);
  CHECK(r.insider_accepted);
}

TEST_CASE("a forged Msg1 verifies only with the right credential") {
  World w(WorldConfig{.seed = 12});
  build_canonical_topology(w);
  const DeviceStore store = w.device("D2").store();
  const Digest pid = store.bundles[0].pids[0];
  const Digest se = w.edge("ES1").credentials().se;
  Rng rng(3);
  const Timestamp now = w.clock().now();
  auto honest = forge_msg1(pid, wire::hash_fields(pid, se), "video", now, rng);
  CHECK(std::holds_alternative<EdgeCase1>(w.edge("ES1").handle_msg1(honest, rng, w.clock())));
  auto forged = forge_msg1(pid, store.bundles[0].masked[0], "video", now, rng);
  CHECK(testing::code_of([&] { w.edge("ES1").handle_msg1(forged, rng, w.clock()); }) ==
        ErrorCode::kAuthFailure);
}

TEST_CASE("reports are reproducible") {
  const auto a = run_attack("tamper", WorldConfig{.seed = 5});
  const auto b = run_attack("tamper", WorldConfig{.seed = 5});
  CHECK(a.transcript == b.transcript);
  CHECK(a.lines == b.lines);
}

}  // TEST_SUITE
