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

#include <CLI11.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "aeaka/capabilities.hpp"
#include "aeaka/cli.hpp"
#include "aeaka/cloud_server.hpp"
#include "aeaka/device.hpp"
#include "aeaka/edge_server.hpp"
#include "aeaka/sim/attacks.hpp"
#include "aeaka/sim/scenario.hpp"
#include "aeaka/sim/world.hpp"
#include "aeaka/snapshot.hpp"
#include "aeaka/trust_authority.hpp"

namespace aeaka::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct CliConfig {
  std::string dir = "aeaka-store";
  std::uint64_t seed = 1;
  std::uint32_t window = kDefaultFreshnessWindow;
  std::uint32_t pool = kDefaultPoolSize;
  std::string pool_mode = "reuse";
  std::uint32_t lockout = kDefaultLockoutLimit;
  std::uint32_t now = sim::kDefaultStartTime;
  bool show_secrets = false;
  bool json = false;

  PseudonymMode mode() const { return *parse_pseudonym_mode(pool_mode); }
  DeviceConfig device() const { return DeviceConfig{window, lockout, mode()}; }
  sim::WorldConfig world() const {
    sim::WorldConfig w;
    w.seed = seed;
    w.start_time = now;
    w.window = window;
    w.pool_size = pool;
    w.mode = mode();
    w.lockout_limit = lockout;
    return w;
  }
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Collects a command's output once and renders it as text or JSON.
class Report {
 public:
  void line(const std::string& text) { lines_.push_back(text); }
  void field(const std::string& key, Json value, const std::string& text) {
    doc_[key] = std::move(value);
    lines_.push_back(text);
  }
  void field(const std::string& key, const std::string& value) {
    field(key, value, key + ": " + value);
  }
  Json& doc() { return doc_; }

  void render(std::ostream& out, bool json) const {
    if (json) {
      out << doc_.dump(2) << '\n';
      return;
    }
    for (const auto& l : lines_) out << l << '\n';
  }

 private:
  Json doc_ = Json::object();
  std::vector<std::string> lines_;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDuplicateRegistration:
    case ErrorCode::kUnknownCs:
    case ErrorCode::kUnknownEs:
    case ErrorCode::kInvalidCount:
    case ErrorCode::kScenarioError:
    case ErrorCode::kIoError:
    case ErrorCode::kAlreadyInitialized:
    case ErrorCode::kInvalidSnapshot:
      return kExitUsage;
    default:
      return kExitProtocol;
  }
}

class Store {
 public:
  explicit Store(const fs::path& root) : root_(root) {}

  fs::path ta() const { return root_ / "ta.jsonl"; }
  fs::path cs(const std::string& cid) const { return root_ / "cs" / file(cid); }
  fs::path es(const std::string& eid) const { return root_ / "es" / file(eid); }
  fs::path device(const std::string& id) const { return root_ / "devices" / file(id); }
  const fs::path& root() const { return root_; }

  std::string read(const fs::path& p, const std::string& what) const {
    if (!fs::exists(p)) {
      throw ProtocolError(ErrorCode::kIoError, what + " not found at " + p.string());
    }
    return snapshot::read_file(p);
  }

  void require_initialized() const {
    if (!fs::exists(ta())) {
      throw ProtocolError(ErrorCode::kIoError,
                          "no trusted authority in " + root_.string() + "; run setup first");
    }
  }

 private:
  static std::string file(const std::string& name) {
    if (name.empty() || name.front() == '.' ||
        name.find_first_of("/\\") != std::string::npos) {
      throw UsageError("invalid entity name '" + name + "'");
    }
    return name + ".jsonl";
  }

  fs::path root_;
};

std::string fingerprint(const Digest& key) { return wire::hash_fields(key).hex(); }

std::string read_password(std::optional<std::string> flag, const char* prompt, std::istream& in,
                          std::ostream& err) {
  if (flag) return *flag;
  err << prompt << ": " << std::flush;
  std::string pw;
  if (!std::getline(in, pw)) throw UsageError(std::string("no ") + prompt + " given");
  return pw;
}

std::string join(const std::vector<std::string>& items, const char* sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

// Deterministic per-command randomness: same store, seed and command give
// the same nonces, while any change of entity state moves the stream.
std::unique_ptr<Rng> command_rng(std::uint64_t seed, const std::string& role,
                                 const std::string& state) {
  const Digest d = hash({Bytes(state.begin(), state.end())});
  return std::make_unique<Rng>(seed, role + ":" + d.hex());
}

// ---------------------------------------------------------------- setup

int cmd_setup(const CliConfig& cfg, bool force, Report& r) {
  Store store(cfg.dir);
  if (fs::exists(store.ta()) && !force) {
    throw ProtocolError(ErrorCode::kAlreadyInitialized,
                        store.root().string() + " already holds a trusted authority");
  }
  std::error_code ec;
  fs::create_directories(store.root(), ec);
  if (ec) throw ProtocolError(ErrorCode::kIoError, "cannot create " + store.root().string());
  if (force) {
    for (const char* sub : {"cs", "es", "devices"}) fs::remove_all(store.root() / sub, ec);
  }
  SimClock clock(cfg.now);
  auto ta = TrustAuthority::setup(cfg.seed, clock);
  snapshot::atomic_write(store.ta(), ta->to_snapshot());
  r.field("initialized", store.root().string());
  r.field("ta", store.ta().string());
  if (cfg.show_secrets) r.field("s", ta->master_secret().hex());
  return kExitOk;
}

// ------------------------------------------------------------- register

struct TaSession {
  SimClock clock;
  std::unique_ptr<TrustAuthority> ta;
  Store store;

  explicit TaSession(const CliConfig& cfg) : clock(cfg.now), store(cfg.dir) {
    store.require_initialized();
    ta = TrustAuthority::from_snapshot(store.read(store.ta(), "trusted authority"), clock);
  }

  template <typename Resp, typename Req>
  Resp call(const Req& req) {
    return std::get<Resp>(wire::decode(ta->serve(wire::encode(req))));
  }

  void save() { snapshot::atomic_write(store.ta(), ta->to_snapshot()); }
};

int cmd_register_cs(const CliConfig& cfg, const std::string& cid,
                    const std::vector<std::string>& services, Report& r) {
  TaSession s(cfg);
  const fs::path path = s.store.cs(cid);
  auto resp = s.call<wire::CsRegistrationResponse>(wire::CsRegistrationRequest{cid});
  auto cs = CloudServer::from_registration(cid, resp, {services.begin(), services.end()},
                                           CloudConfig{cfg.window});
  snapshot::atomic_write(path, cs->to_snapshot());
  s.save();
  r.field("registered", "cs " + cid, "registered cs " + cid);
  r.field("services", Json(services), "services: " + join(services));
  r.field("public key digest", resp.pk_digest.hex());
  if (cfg.show_secrets) {
    r.field("SC", resp.sc.hex());
    r.field("secret key", resp.secret_key.hex());
  }
  return kExitOk;
}

int cmd_register_es(const CliConfig& cfg, const std::string& eid,
                    const std::vector<std::string>& clouds, const std::string& caps_text,
                    Report& r) {
  Capabilities caps;
  try {
    caps = Capabilities::from_json(caps_text);
  } catch (const ProtocolError& e) {
    throw UsageError(std::string("bad --caps: ") + e.what());
  }
  TaSession s(cfg);
  const fs::path path = s.store.es(eid);
  auto resp = s.call<wire::EsRegistrationResponse>(wire::EsRegistrationRequest{eid, clouds});
  auto es = EdgeServer::from_registration(eid, resp, caps, EdgeConfig{cfg.window});
  snapshot::atomic_write(path, es->to_snapshot());
  s.save();
  r.field("registered", "es " + eid, "registered es " + eid);
  r.field("capabilities", caps.to_json());
  r.field("public key digest", resp.pk_digest.hex());
  Json pids = Json::object();
  for (const auto& e : resp.e2c) {
    pids[e.cid] = e.pid.hex();
    r.line("pseudonym for " + e.cid + ": " + e.pid.hex());
    if (cfg.show_secrets) r.line("C for " + e.cid + ": " + e.credential.hex());
  }
  r.doc()["pseudonyms"] = pids;
  if (cfg.show_secrets) {
    r.field("SE", resp.se.hex());
    r.field("secret key", resp.secret_key.hex());
  }
  return kExitOk;
}

int cmd_register_device(const CliConfig& cfg, const std::string& uid, const std::string& id,
                        const std::string& pw, const std::vector<std::string>& edges,
                        std::uint32_t n, Report& r) {
  TaSession s(cfg);
  const fs::path path = s.store.device(id);
  if (fs::exists(path)) {
    throw ProtocolError(ErrorCode::kDuplicateRegistration, "device " + id + " already stored");
  }
  auto resp = s.call<wire::DeviceRegistrationResponse>(
      Device::registration_request(uid, id, pw, edges, n));
  auto dev = Device::from_registration(resp, uid, id, pw, cfg.device());
  snapshot::atomic_write(path, dev->to_snapshot());
  s.save();
  r.field("registered", "device " + id, "registered device " + id);
  Json bundles = Json::object();
  std::vector<std::string> parts;
  for (const auto& eid : edges) {
    const auto digest = s.ta->es_public_digest(eid);
    for (const auto& b : resp.bundles) {
      if (digest && b.es == *digest) {
        bundles[eid] = b.pids.size();
        parts.push_back(eid + " x " + std::to_string(b.pids.size()));
      }
    }
  }
  r.field("bundles", bundles,
          "bundles: " + std::to_string(resp.bundles.size()) + " (" + join(parts) + ")");
  if (cfg.show_secrets) {
    r.field("DID", resp.did.hex());
    r.field("secret key", resp.secret_key.hex());
  }
  return kExitOk;
}

// ----------------------------------------------------------------- auth

struct AuthArgs {
  std::string device, uid, es, service;
  std::optional<std::string> pw;
};

int cmd_auth(const CliConfig& cfg, const AuthArgs& a, std::istream& in, std::ostream& err,
             Report& r) {
  Store store(cfg.dir);
  store.require_initialized();
  const fs::path dev_path = store.device(a.device);
  const fs::path es_path = store.es(a.es);
  const std::string dev_text = store.read(dev_path, "device " + a.device);
  const std::string es_text = store.read(es_path, "edge server " + a.es);
  auto dev = Device::from_snapshot(dev_text, cfg.device());
  auto es = EdgeServer::from_snapshot(es_text, EdgeConfig{cfg.window});
  const std::string pw = read_password(a.pw, "password", in, err);
  SimClock clock(cfg.now);

  r.field("device", a.device);
  r.field("es", a.es);
  r.field("service", a.service);

  std::optional<LoginToken> token;
  try {
    token.emplace(dev->login(a.uid, a.device, pw));
  } catch (const ProtocolError& e) {
    snapshot::atomic_write(dev_path, dev->to_snapshot());
    r.field("result", "reject");
    r.field("error", std::string(error_name(e.code())));
    r.field("stage", "login");
    r.field("msg1 sent", Json(false), "msg1 sent: no");
    return kExitProtocol;
  }

  HashCounter dev_hashes, es_hashes, cs_hashes;
  std::vector<sim::MessageCost> messages;
  auto account = [&](const wire::Message& m) {
    messages.push_back({wire::type_of(m), wire::accounted_bits(m)});
  };
  auto dev_rng = command_rng(cfg.seed, "device", dev_text);
  auto es_rng = command_rng(cfg.seed, "es", es_text);
  std::unique_ptr<CloudServer> cs;
  fs::path cs_path;
  std::string cid;
  int protocol_case = 0;
  std::string stage = "device";
  std::optional<Digest> dev_key, es_key, cs_key;

  auto persist = [&] {
    snapshot::atomic_write(dev_path, dev->to_snapshot());
    snapshot::atomic_write(es_path, es->to_snapshot());
    if (cs) snapshot::atomic_write(cs_path, cs->to_snapshot());
  };

  try {
    std::optional<std::pair<wire::AuthRequest, DeviceAuthSession>> begun;
    {
      HashCountScope scope(dev_hashes);
      begun.emplace(dev->begin_auth(*token, es->pk_digest(), make_ser_req(a.service), *dev_rng,
                                    clock));
    }
    auto& [msg1, session] = *begun;
    const Bytes msg1_bytes = wire::encode(msg1);
    r.field("pseudonym", msg1.pid.hex());
    stage = "es";
    wire::Message m1 = wire::decode(msg1_bytes);
    account(m1);
    EdgeDecision decision = [&] {
      HashCountScope scope(es_hashes);
      return es->handle_msg1(std::get<wire::AuthRequest>(m1), *es_rng, clock, a.device);
    }();
    if (auto* c1 = std::get_if<EdgeCase1>(&decision)) {
      protocol_case = 1;
      es_key = c1->session_key;
      wire::Message m2 = wire::decode(wire::encode(c1->msg2));
      account(m2);
      stage = "device";
      HashCountScope scope(dev_hashes);
      dev_key = dev->complete_case1(session, std::get<wire::EdgeResponse>(m2), clock);
    } else {
      protocol_case = 2;
      auto& c2 = std::get<EdgeCase2>(decision);
      cid = c2.cid;
      cs_path = store.cs(cid);
      const std::string cs_text = store.read(cs_path, "cloud server " + cid);
      cs = CloudServer::from_snapshot(cs_text, CloudConfig{cfg.window});
      auto cs_rng = command_rng(cfg.seed, "cs", cs_text);
      wire::Message m3 = wire::decode(wire::encode(c2.msg3));
      account(m3);
      stage = "cs";
      CloudResult cr = [&] {
        HashCountScope scope(cs_hashes);
        return cs->handle_msg3(std::get<wire::CloudRequest>(m3), *cs_rng, clock);
      }();
      cs_key = cr.session_key;
      wire::Message m4 = wire::decode(wire::encode(cr.msg4));
      account(m4);
      stage = "es";
      EdgeRelayResult rr = [&] {
        HashCountScope scope(es_hashes);
        return es->handle_msg4(std::get<wire::CloudResponse>(m4), c2.relay_id, clock);
      }();
      es_key = rr.session_key;
      wire::Message m5 = wire::decode(wire::encode(rr.msg5));
      account(m5);
      stage = "device";
      HashCountScope scope(dev_hashes);
      dev_key = dev->complete_case2(session, std::get<wire::EdgeRelay>(m5), clock);
    }
  } catch (const ProtocolError& e) {
    persist();
    if (protocol_case) r.field("case", Json(protocol_case), "case: " + std::to_string(protocol_case));
    r.field("result", "reject");
    r.field("error", std::string(error_name(e.code())));
    r.field("stage", stage);
    return exit_code_for(e.code()) == kExitUsage ? kExitUsage : kExitProtocol;
  }
  persist();

  const bool agree = dev_key == es_key && (protocol_case == 1 || dev_key == cs_key);
  r.field("case", Json(protocol_case), "case: " + std::to_string(protocol_case));
  if (protocol_case == 2) r.field("cs", cid);
  r.field("result", agree ? "accept" : "reject");
  Json fps = Json::object();
  fps["device"] = fingerprint(*dev_key);
  fps["es"] = fingerprint(*es_key);
  if (cs_key) fps["cs"] = fingerprint(*cs_key);
  r.doc()["key fingerprints"] = fps;
  r.line("key fingerprint device: " + fps["device"].get<std::string>());
  r.line("key fingerprint es: " + fps["es"].get<std::string>());
  if (cs_key) r.line("key fingerprint cs: " + fps["cs"].get<std::string>());
  r.field("keys agree", Json(agree), std::string("keys agree: ") + (agree ? "yes" : "no"));
  if (cfg.show_secrets) r.field("session key", dev_key->hex());

  Json hashes = Json::object();
  hashes["device"] = dev_hashes.count();
  hashes["es"] = es_hashes.count();
  if (protocol_case == 2) hashes["cs"] = cs_hashes.count();
  const std::uint64_t total = dev_hashes.count() + es_hashes.count() + cs_hashes.count();
  hashes["total"] = total;
  r.doc()["hashes"] = hashes;
  std::string hl = "hashes: device " + std::to_string(dev_hashes.count()) + ", es " +
                   std::to_string(es_hashes.count());
  if (protocol_case == 2) hl += ", cs " + std::to_string(cs_hashes.count());
  r.line(hl + ", total " + std::to_string(total));

  Json bits = Json::array();
  std::size_t total_bits = 0;
  std::string parts;
  for (const auto& m : messages) {
    bits.push_back({{"message", std::string(wire::message_name(m.type))}, {"bits", m.bits}});
    parts += (parts.empty() ? "" : " + ") + std::string(wire::message_name(m.type)) + " " +
             std::to_string(m.bits);
    total_bits += m.bits;
  }
  r.doc()["messages"] = bits;
  r.doc()["total bits"] = total_bits;
  r.line("Case " + std::to_string(protocol_case) + ": " + std::to_string(total_bits) + " bits (" +
         parts + ")");
  return agree ? kExitOk : kExitProtocol;
}

// ------------------------------------------------------ update-password

int cmd_update_password(const CliConfig& cfg, const std::string& id, const std::string& uid,
                        const std::string& old_pw, const std::string& new_pw, Report& r) {
  Store store(cfg.dir);
  store.require_initialized();
  const fs::path path = store.device(id);
  auto dev = Device::from_snapshot(store.read(path, "device " + id), cfg.device());
  r.field("device", id);
  try {
    dev->update_password(uid, id, old_pw, new_pw);
  } catch (const ProtocolError& e) {
    r.field("result", "reject");
    r.field("error", std::string(error_name(e.code())));
    return kExitProtocol;
  }
  snapshot::atomic_write(path, dev->to_snapshot());
  r.field("result", "password updated");
  return kExitOk;
}

// --------------------------------------------------------------- attack

int cmd_attack(const CliConfig& cfg, const std::string& target,
               const std::optional<std::string>& transcript_path, Report& r) {
  std::string transcript;
  int code = kExitOk;
  if (sim::is_attack_name(target)) {
    sim::AttackReport rep = sim::run_attack(target, cfg.world());
    r.field("attack", rep.name);
    for (const auto& l : rep.lines) r.line(l);
    r.doc()["groups"] = rep.lines;
    r.doc()["attempts"] = rep.attempts;
    r.doc()["rejected"] = rep.rejected;
    r.doc()["baseline ok"] = rep.sanity_ok;
    r.doc()["breaches"] = rep.breaches;
    for (const auto& b : rep.breaches) r.line("BREACH " + b);
    if (!rep.sanity_ok) r.line("honest baseline failed");
    r.line("result: " + std::to_string(rep.rejected) + "/" + std::to_string(rep.attempts) +
           " attacks rejected");
    r.doc()["result"] = rep.passed() ? "pass" : "fail";
    transcript = rep.transcript;
    code = rep.passed() ? kExitOk : kExitProtocol;
  } else if (fs::exists(target)) {
    sim::Scenario sc = sim::Scenario::load(target);
    if (auto problem = sim::vacuity_problem(sc); !problem.empty()) {
      throw ProtocolError(ErrorCode::kScenarioError, sc.name + ": " + problem);
    }
    sim::ScenarioResult res = sim::run(sc);
    r.field("scenario", sc.name);
    Json steps = Json::array();
    for (const auto& o : res.outcomes) {
      std::string l = "step " + std::to_string(o.step) + " " + o.action + ": " + o.actual;
      if (!o.expect.empty()) l += o.ok ? " (as expected)" : " (EXPECTED " + o.expect + ")";
      r.line(l);
      steps.push_back({{"step", o.step}, {"action", o.action}, {"expect", o.expect},
                       {"actual", o.actual}, {"ok", o.ok}});
    }
    r.doc()["steps"] = steps;
    r.field("result", res.passed() ? "pass" : "fail");
    transcript = res.transcript;
    code = res.passed() ? kExitOk : kExitProtocol;
  } else {
    throw UsageError("unknown attack '" + target + "' (builtins: " +
                     join(sim::attack_names()) + ", or a scenario file)");
  }
  if (transcript_path) snapshot::atomic_write(*transcript_path, transcript);
  return code;
}

// ---------------------------------------------------------------- bench

int cmd_bench(const CliConfig& cfg, std::size_t runs, bool timing,
              const std::optional<std::string>& csv_path, Report& r) {
  if (runs == 0) throw UsageError("--runs must be positive");
  sim::World world(cfg.world());
  sim::build_canonical_topology(world);
  std::vector<sim::CaseCost> costs;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < runs; ++i) {
    for (const char* service : {sim::kLocalService, sim::kRelayedService}) {
      sim::AuthRun run = world.authenticate("D1", "ES1", service);
      if (!run.keys_agree()) {
        ++failures;
        continue;
      }
      costs.push_back(run.cost);
    }
    world.advance_clock(1);
  }
  sim::CostReport report;
  try {
    report = sim::summarize(costs);
  } catch (const std::logic_error& e) {
    r.field("result", std::string("fail: ") + e.what());
    return kExitProtocol;
  }
  std::istringstream table(sim::emit_cost_table(report, timing));
  for (std::string l; std::getline(table, l);) r.line(l);
  r.line("");

  struct Expect {
    int protocol_case;
    std::map<std::string, std::uint64_t> hashes;
    std::size_t bits;
  };
  const Expect expected[] = {
      {1, {{sim::kRoleDevice, 4}, {sim::kRoleEdge, 4}}, 1344},
      {2, {{sim::kRoleDevice, 5}, {sim::kRoleEdge, 7}, {sim::kRoleCloud, 5}}, 2688}};
  bool ok = failures == 0;
  Json cases = Json::array();
  for (const auto& e : expected) {
    const sim::CaseCost* c = report.find(e.protocol_case);
    const bool match = c && c->hashes == e.hashes && c->total_bits() == e.bits && c->runs == runs;
    ok = ok && match;
    r.line("check Case " + std::to_string(e.protocol_case) + ": " + (match ? "ok" : "MISMATCH") +
           " (" + std::to_string(c ? c->runs : 0) + " identical runs)");
    Json jc = {{"case", e.protocol_case}, {"runs", c ? c->runs : 0}, {"ok", match}};
    if (c) {
      jc["hashes"] = c->hashes;
      jc["total hashes"] = c->total_hashes();
      jc["bits"] = c->total_bits();
      if (timing) jc["micros"] = c->micros;
    }
    cases.push_back(jc);
  }
  r.doc()["cases"] = cases;
  r.doc()["failed runs"] = failures;
  r.doc()["result"] = ok ? "pass" : "fail";
  if (failures) r.line("failed runs: " + std::to_string(failures));
  if (csv_path) snapshot::atomic_write(*csv_path, sim::emit_cost_csv(report));
  return ok ? kExitOk : kExitProtocol;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
            std::istream& in) {
  CLI::App app{"Cloud-edge-device authentication and key agreement"};
  app.name("aeaka");
  app.require_subcommand(1);
  app.fallthrough();

  CliConfig cfg;
  app.add_option("--dir", cfg.dir, "Store directory");
  app.add_option("--seed", cfg.seed, "Seed for all randomness")->check(CLI::PositiveNumber);
  app.add_option("--window", cfg.window, "Freshness window, seconds")->check(CLI::PositiveNumber);
  app.add_option("--pool", cfg.pool, "Pseudonyms per edge server")->check(CLI::PositiveNumber);
  app.add_option("--pool-mode", cfg.pool_mode, "reuse or single-use")
      ->check(CLI::IsMember({"reuse", "single-use"}));
  app.add_option("--lockout", cfg.lockout, "Failed logins before lockout")
      ->check(CLI::PositiveNumber);
  app.add_option("--now", cfg.now, "Clock value, Unix seconds")->check(CLI::PositiveNumber);
  app.add_flag("--show-secrets", cfg.show_secrets, "Print secret material");
  app.add_flag("--json", cfg.json, "Machine-readable output");

  Report report;
  std::function<int()> action;

  auto* setup = app.add_subcommand("setup", "Initialize the trusted authority");
  bool force = false;
  setup->add_flag("--force", force, "Overwrite an existing store");
  setup->callback([&] { action = [&] { return cmd_setup(cfg, force, report); }; });

  auto* reg = app.add_subcommand("register", "Register an entity with the trusted authority");
  reg->require_subcommand(1);
  auto* reg_cs = reg->add_subcommand("cs", "Cloud server");
  std::string cid;
  std::vector<std::string> services;
  reg_cs->add_option("--cid", cid, "Cloud server identity")->required();
  reg_cs->add_option("--services", services, "Service tags served")->delimiter(',');
  reg_cs->callback([&] { action = [&] { return cmd_register_cs(cfg, cid, services, report); }; });

  auto* reg_es = reg->add_subcommand("es", "Edge server");
  std::string eid, caps = "{}";
  std::vector<std::string> clouds;
  reg_es->add_option("--eid", eid, "Edge server identity")->required();
  reg_es->add_option("--cs", clouds, "Cloud servers to pair with")->delimiter(',');
  reg_es->add_option("--caps", caps, R"(Capabilities, e.g. {"video":"local","storage":["CS1"]})");
  reg_es->callback(
      [&] { action = [&] { return cmd_register_es(cfg, eid, clouds, caps, report); }; });

  auto* reg_dev = reg->add_subcommand("device", "Device");
  std::string uid, dev_id;
  std::optional<std::string> pw;
  std::vector<std::string> edges;
  std::optional<std::uint32_t> n;
  reg_dev->add_option("--uid", uid, "User identity")->required();
  reg_dev->add_option("--id", dev_id, "Device identity")->required();
  reg_dev->add_option("--pw", pw, "Password (prompted when absent)");
  reg_dev->add_option("--es", edges, "Edge servers")->delimiter(',')->required();
  reg_dev->add_option("--n", n, "Pseudonyms per edge server (default --pool)")
      ->check(CLI::PositiveNumber);
  reg_dev->callback([&] {
    action = [&] {
      const std::string p = read_password(pw, "password", in, err);
      return cmd_register_device(cfg, uid, dev_id, p, edges, n.value_or(cfg.pool), report);
    };
  });

  auto* auth = app.add_subcommand("auth", "Authenticate a device and agree a session key");
  AuthArgs auth_args;
  auth->add_option("--device", auth_args.device, "Device identity")->required();
  auth->add_option("--uid", auth_args.uid, "User identity")->required();
  auth->add_option("--pw", auth_args.pw, "Password (prompted when absent)");
  auth->add_option("--es", auth_args.es, "Edge server")->required();
  auth->add_option("--service", auth_args.service, "Requested service tag")->required();
  auth->callback([&] { action = [&] { return cmd_auth(cfg, auth_args, in, err, report); }; });

  auto* attack = app.add_subcommand("attack", "Run an attack battery or a scenario file");
  std::string target;
  std::optional<std::string> transcript_path;
  attack->add_option("target", target, join(sim::attack_names()) + ", or a scenario file")
      ->required();
  attack->add_option("--transcript", transcript_path, "Write the transcript here");
  attack->callback(
      [&] { action = [&] { return cmd_attack(cfg, target, transcript_path, report); }; });

  auto* bench = app.add_subcommand("bench", "Cost table over repeated runs of both cases");
  std::size_t runs = 200;
  bool timing = false;
  std::optional<std::string> csv_path;
  bench->add_option("--runs", runs, "Runs per case");
  bench->add_flag("--timing", timing, "Include measured handler times");
  bench->add_option("--csv", csv_path, "Write the table as CSV here");
  bench->callback(
      [&] { action = [&] { return cmd_bench(cfg, runs, timing, csv_path, report); }; });

  auto* upd = app.add_subcommand("update-password", "Change a device password offline");
  std::string upd_dev, upd_uid;
  std::optional<std::string> old_pw, new_pw;
  upd->add_option("--device", upd_dev, "Device identity")->required();
  upd->add_option("--uid", upd_uid, "User identity")->required();
  upd->add_option("--old", old_pw, "Current password (prompted when absent)");
  upd->add_option("--new", new_pw, "New password (prompted when absent)");
  upd->callback([&] {
    action = [&] {
      const std::string o = read_password(old_pw, "current password", in, err);
      const std::string nw = read_password(new_pw, "new password", in, err);
      return cmd_update_password(cfg, upd_dev, upd_uid, o, nw, report);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const int code = action();
    report.render(out, cfg.json);
    return code;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ProtocolError& e) {
    report.field("result", "reject");
    report.field("error", std::string(error_name(e.code())));
    report.render(out, cfg.json);
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace aeaka::cli
