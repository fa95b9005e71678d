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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "aeaka/cli.hpp"
#include "aeaka/trust_authority.hpp"
#include "oracle/reference.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace aeaka;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

class TempStore {
 public:
  TempStore() {
    static int counter = 0;
    root_ = fs::temp_directory_path() /
            ("aeaka-cli-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  ~TempStore() { fs::remove_all(root_); }
  std::string dir() const { return (root_ / "store").string(); }
  std::string path(const std::string& name) const { return (root_ / name).string(); }

  Result run(std::vector<std::string> args, const std::string& input = "") const {
    args.insert(args.begin(), {"aeaka", "--dir", dir()});
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    std::istringstream in(input);
    Result r;
    r.code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err, in);
    r.out = out.str();
    r.err = err.str();
    return r;
  }

  // CS1 (storage) and ES1 (video local, storage via CS1), device dev1.
  void provision(std::uint32_t n = 4) const {
    REQUIRE(run({"--seed", "7", "setup"}).code == 0);
    REQUIRE(run({"register", "cs", "--cid", "CS1", "--services", "storage"}).code == 0);
    REQUIRE(run({"register", "es", "--eid", "ES1", "--cs", "CS1", "--caps",
                 R"({"video":"local","storage":["CS1"]})"})
                .code == 0);
    REQUIRE(run({"register", "device", "--uid", "alice", "--id", "dev1", "--pw", "pw-one",
                 "--es", "ES1", "--n", std::to_string(n)})
                .code == 0);
  }

  Result auth(const std::string& service, const std::string& pw = "pw-one") const {
    return run({"auth", "--device", "dev1", "--uid", "alice", "--pw", pw, "--es", "ES1",
                "--service", service});
  }

  std::string read(const std::string& rel) const {
    std::ifstream f(fs::path(dir()) / rel, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
  }

  std::string snapshot_all() const {
    std::string all;
    for (const auto& e : fs::recursive_directory_iterator(dir())) {
      if (e.is_regular_file()) all += e.path().string() + "\n" + read(fs::relative(e.path(), dir()).string());
    }
    return all;
  }

 private:
  fs::path root_;
};

bool has(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("setup") {
  TempStore a, b, c;
  CHECK(a.run({"--seed", "7", "setup"}).code == cli::kExitOk);
  CHECK(fs::exists(fs::path(a.dir()) / "ta.jsonl"));
  auto again = a.run({"setup"});
  CHECK(again.code == cli::kExitUsage);
  CHECK(has(again.err, "AlreadyInitialized"));
  CHECK(a.run({"setup", "--force"}).code == cli::kExitOk);
  b.run({"--seed", "7", "setup"});
  c.run({"--seed", "8", "setup"});
  SimClock clock(0);
  auto ta_b = TrustAuthority::from_snapshot(b.read("ta.jsonl"), clock);
  auto ta_c = TrustAuthority::from_snapshot(c.read("ta.jsonl"), clock);
  CHECK(ta_b->master_secret() != ta_c->master_secret());
}

TEST_CASE("same seed gives the same master secret") {
  TempStore a, b;
  a.run({"--seed", "7", "setup"});
  b.run({"--seed", "7", "setup"});
  CHECK(a.read("ta.jsonl") == b.read("ta.jsonl"));
}

TEST_CASE("commands without a store fail with a usage error") {
  TempStore t;
  CHECK(t.run({"register", "cs", "--cid", "CS1"}).code == cli::kExitUsage);
  CHECK(t.run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(t.run({}).code == cli::kExitUsage);
}

TEST_CASE("register matches the reference credentials") {
  TempStore t;
  t.run({"--seed", "7", "setup"});
  auto r = t.run({"--show-secrets", "register", "cs", "--cid", "CS1", "--services", "storage"});
  REQUIRE(r.code == 0);
  SimClock clock(0);
  auto ta = TrustAuthority::from_snapshot(t.read("ta.jsonl"), clock);
  const Digest pkd = *ta->cs_public_digest("CS1");
  const auto sc = oracle::sc(testing::ob(ta->master_secret()), testing::ob(pkd));
  CHECK(has(r.out, "SC: " + testing::ad(sc).hex()));
  const auto cs_records = nlohmann::json::parse(t.read("cs/CS1.jsonl").substr(
      0, t.read("cs/CS1.jsonl").find('\n')));
  CHECK(cs_records.at("sc") == testing::ad(sc).hex());
  CHECK(has(r.out, pkd.hex()));

  auto es = t.run({"register", "es", "--eid", "ES9", "--cs", "CS9", "--caps", "{}"});
  CHECK(es.code == cli::kExitUsage);
  CHECK(has(es.err, "UnknownCs"));
  CHECK(t.run({"register", "cs", "--cid", "CS1"}).code == cli::kExitUsage);
  CHECK(t.run({"register", "es", "--eid", "ES1", "--cs", "CS1", "--caps", "nope"}).code ==
        cli::kExitUsage);
}

TEST_CASE("device registration reports one bundle per edge server") {
  TempStore t;
  t.provision();
  t.run({"register", "es", "--eid", "ES2", "--cs", "CS1", "--caps", R"({"video":"local"})"});
  auto r = t.run({"register", "device", "--uid", "bob", "--id", "dev2", "--pw", "x", "--es",
                  "ES1,ES2", "--n", "4"});
  CHECK(r.code == 0);
  CHECK(has(r.out, "2 (ES1 x 4, ES2 x 4)"));
  CHECK(t.run({"register", "device", "--uid", "c", "--id", "dev3", "--pw", "x", "--es", "ES1",
               "--n", "0"})
            .code == cli::kExitUsage);
}

TEST_CASE("auth in both cases") {
  TempStore t;
  t.provision();
  auto c1 = t.auth("video");
  CHECK(c1.code == cli::kExitOk);
  CHECK(has(c1.out, "case: 1"));
  CHECK(has(c1.out, "keys agree: yes"));
  CHECK(has(c1.out, "hashes: device 4, es 4, total 8"));
  CHECK(has(c1.out, "1344 bits"));
  auto c2 = t.auth("storage:bucket");
  CHECK(c2.code == cli::kExitOk);
  CHECK(has(c2.out, "case: 2"));
  CHECK(has(c2.out, "hashes: device 5, es 7, cs 5, total 17"));
  CHECK(has(c2.out, "2688 bits"));
  CHECK(t.auth("music").code == cli::kExitProtocol);
}

TEST_CASE("wrong password never reaches the network") {
  TempStore t;
  t.provision();
  const std::string es_before = t.read("es/ES1.jsonl");
  auto r = t.auth("video", "pw-two");
  CHECK(r.code == cli::kExitProtocol);
  CHECK(has(r.out, "msg1 sent: no"));
  CHECK(has(r.out, "BadCredentials"));
  CHECK(t.read("es/ES1.jsonl") == es_before);
  // The failed attempt counts towards the lockout.
  t.auth("video", "x");
  t.auth("video", "y");
  auto locked = t.auth("video");
  CHECK(locked.code == cli::kExitProtocol);
  CHECK(has(locked.out, "LockedOut"));
}

TEST_CASE("password update") {
  TempStore t;
  t.provision();
  const std::string before = t.snapshot_all();
  auto bad = t.run({"update-password", "--device", "dev1", "--uid", "alice", "--old", "nope",
                    "--new", "pw-two"});
  CHECK(bad.code == cli::kExitProtocol);
  CHECK(t.snapshot_all() == before);

  CHECK(t.run({"update-password", "--device", "dev1", "--uid", "alice", "--old", "pw-one",
               "--new", "pw-two"})
            .code == cli::kExitOk);
  CHECK(t.read("devices/dev1.jsonl") != before);
  CHECK(t.auth("video", "pw-one").code == cli::kExitProtocol);
  CHECK(t.auth("video", "pw-two").code == cli::kExitOk);
  CHECK(t.auth("storage", "pw-two").code == cli::kExitOk);
}

TEST_CASE("update and update back restores the masked credentials") {
  TempStore t;
  t.provision();
  const std::string original = t.read("devices/dev1.jsonl");
  t.run({"update-password", "--device", "dev1", "--uid", "alice", "--old", "pw-one", "--new",
         "other"});
  t.run({"update-password", "--device", "dev1", "--uid", "alice", "--old", "other", "--new",
         "pw-one"});
  CHECK(t.read("devices/dev1.jsonl") == original);
}

TEST_CASE("passwords from stdin") {
  TempStore t;
  t.provision();
  auto r = t.run({"update-password", "--device", "dev1", "--uid", "alice"}, "pw-one\npw-three\n");
  CHECK(r.code == cli::kExitOk);
  CHECK(t.auth("video", "pw-three").code == cli::kExitOk);
}

TEST_CASE("no secrets on stdout unless asked") {
  TempStore t;
  t.provision();
  SimClock clock(0);
  auto ta = TrustAuthority::from_snapshot(t.read("ta.jsonl"), clock);
  const std::string s_hex = ta->master_secret().hex();
  const std::string sc_hex =
      testing::ad(oracle::sc(testing::ob(ta->master_secret()),
                             testing::ob(*ta->cs_public_digest("CS1"))))
          .hex();
  std::string out;
  out += t.run({"register", "cs", "--cid", "CS2", "--services", "x"}).out;
  out += t.auth("video").out;
  out += t.auth("storage").out;
  out += t.run({"--json", "auth", "--device", "dev1", "--uid", "alice", "--pw", "pw-one", "--es",
                "ES1", "--service", "storage"})
             .out;
  CHECK_FALSE(has(out, s_hex));
  CHECK_FALSE(has(out, sc_hex));
  CHECK_FALSE(has(out, "pw-one"));
  CHECK_FALSE(has(out, "secret key"));
  // Every digest held in any store file: keys, masks, credentials.
  std::size_t scanned = 0;
  for (const auto& e : fs::recursive_directory_iterator(t.dir())) {
    if (!e.is_regular_file()) continue;
    std::istringstream lines(t.read(fs::relative(e.path(), t.dir()).string()));
    for (std::string line; std::getline(lines, line);) {
      const auto rec = nlohmann::json::parse(line);
      for (const char* key : {"key", "sc", "se", "sk", "c", "q", "did", "s"}) {
        if (rec.contains(key) && rec.at(key).is_string()) {
          ++scanned;
          CHECK_FALSE(has(out, rec.at(key).get<std::string>()));
        }
      }
      if (rec.contains("b")) {
        for (const auto& b : rec.at("b")) CHECK_FALSE(has(out, b.get<std::string>()));
      }
    }
  }
  CHECK(scanned > 10);
  const std::string epw = testing::ad(oracle::epw("alice", "pw-one")).hex();
  CHECK_FALSE(has(out, epw));
}

TEST_CASE("identical commands on identical stores print identical output") {
  TempStore a, b;
  a.provision();
  b.provision();
  for (const char* svc : {"video", "storage", "video"}) {
    const auto ra = a.auth(svc);
    const auto rb = b.auth(svc);
    CHECK(ra.out == rb.out);
    CHECK(ra.code == rb.code);
  }
  CHECK(a.snapshot_all().size() == b.snapshot_all().size());
}

TEST_CASE("json output parses") {
  TempStore t;
  t.provision();
  auto r = t.run({"--json", "auth", "--device", "dev1", "--uid", "alice", "--pw", "pw-one",
                  "--es", "ES1", "--service", "storage"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("case") == 2);
  CHECK(j.at("total bits") == 2688);
  CHECK(j.at("keys agree") == true);
}

TEST_CASE("bench") {
  TempStore t;
  CHECK(t.run({"bench", "--runs", "0"}).code == cli::kExitUsage);
  auto r = t.run({"bench", "--runs", "20", "--csv", t.path("cost.csv")});
  CHECK(r.code == cli::kExitOk);
  CHECK(has(r.out, "1344"));
  CHECK(has(r.out, "2688"));
  CHECK(r.out == t.run({"bench", "--runs", "20"}).out);
  CHECK(fs::exists(t.path("cost.csv")));
}

TEST_CASE("attack") {
  TempStore t;
  auto r = t.run({"attack", "replay", "--transcript", t.path("replay.txt")});
  CHECK(r.code == cli::kExitOk);
  CHECK(fs::file_size(t.path("replay.txt")) > 0);
  CHECK(t.run({"attack", "no-such-attack"}).code == cli::kExitUsage);
  CHECK(t.run({"attack", std::string(AEAKA_SCENARIO_DIR) + "/tamper.json"}).code == cli::kExitOk);

  std::ofstream(t.path("failing.json")) << R"({"name": "f", "seed": 1, "topology": {
    "clouds": [{"cid": "CS1", "services": ["storage"]}],
    "edges": [{"eid": "ES1", "clouds": ["CS1"], "capabilities": {"video": "local"}}],
    "devices": [{"name": "D1", "uid": "u", "id": "d", "password": "p", "edges": ["ES1"]}]},
    "script": [{"action": "auth", "device": "D1", "edge": "ES1", "service": "video", "expect": "case2"}]})";
  CHECK(t.run({"attack", t.path("failing.json")}).code == cli::kExitProtocol);
  std::ofstream(t.path("broken.json")) << "{";
  CHECK(t.run({"attack", t.path("broken.json")}).code == cli::kExitUsage);
}

}  // TEST_SUITE
