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

#include <atomic>
#include <mutex>
#include <set>
#include <thread>

#include "pki.hpp"

using namespace aeaka;
using testing::Pki;

TEST_SUITE("concurrency") {

TEST_CASE("parallel sessions through shared servers") {
  Pki p(31, 64);
  const auto tok = p.login();
  constexpr int kThreads = 8;
  constexpr int kRuns = 60;
  std::atomic<int> agreed{0};
  std::atomic<int> failed{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < kRuns; ++i) {
        try {
          const bool relay = (t + i) % 2 == 1;
          auto [m1, s] = p.device->begin_auth(tok, p.es_pk(),
                                              make_ser_req(relay ? "storage" : "video"), p.rng,
                                              p.clock);
          auto d = p.es->handle_msg1(m1, p.rng, p.clock);
          Digest dk, sk;
          if (auto* c1 = std::get_if<EdgeCase1>(&d)) {
            dk = p.device->complete_case1(s, c1->msg2, p.clock);
            sk = c1->session_key;
          } else {
            auto& c2 = std::get<EdgeCase2>(d);
            auto cr = p.cs->handle_msg3(c2.msg3, p.rng, p.clock);
            auto rr = p.es->handle_msg4(cr.msg4, c2.relay_id, p.clock);
            dk = p.device->complete_case2(s, rr.msg5, p.clock);
            sk = cr.session_key;
          }
          (dk == sk ? agreed : failed)++;
        } catch (const ProtocolError&) {
          failed++;
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(failed == 0);
  CHECK(agreed == kThreads * kRuns);
  CHECK(p.es->open_relays() == 0);
}

TEST_CASE("a message raced by many threads is accepted once") {
  for (int round = 0; round < 20; ++round) {
    Pki p(40 + round);
    const auto tok = p.login();
    auto [m1, s] = p.device->begin_auth(tok, p.es_pk(), make_ser_req("video"), p.rng, p.clock);
    std::atomic<int> accepted{0};
    std::atomic<int> replays{0};
    std::vector<std::thread> threads;
    for (int t = 0; t < 6; ++t) {
      threads.emplace_back([&] {
        try {
          p.es->handle_msg1(m1, p.rng, p.clock);
          accepted++;
        } catch (const ProtocolError& e) {
          if (e.code() == ErrorCode::kReplayDetected) replays++;
        }
      });
    }
    for (auto& th : threads) th.join();
    CHECK(accepted == 1);
    CHECK(replays == 5);
  }
}

TEST_CASE("single-use pool hands out each pseudonym once under contention") {
  DeviceConfig cfg;
  cfg.mode = PseudonymMode::kSingleUse;
  Pki p(50, 40, cfg);
  const auto tok = p.login();
  std::mutex mu;
  std::set<Digest> seen;
  std::atomic<int> empty{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 5; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 10; ++i) {
        try {
          auto [m1, s] =
              p.device->begin_auth(tok, p.es_pk(), make_ser_req("video"), p.rng, p.clock);
          std::lock_guard lock(mu);
          CHECK(seen.insert(m1.pid).second);
        } catch (const ProtocolError& e) {
          if (e.code() == ErrorCode::kEmptyPseudonymPool) empty++;
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(seen.size() == 40);
  CHECK(empty == 10);
}

}  // TEST_SUITE
