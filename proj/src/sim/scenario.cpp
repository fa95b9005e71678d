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

#include "aeaka/sim/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "aeaka/sim/attacks.hpp"
#include "aeaka/snapshot.hpp"

namespace aeaka::sim {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) {
  throw ProtocolError(ErrorCode::kScenarioError, what);
}

const json& need(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) bad(where + ": missing \"" + key + "\"");
  return obj.at(key);
}

std::string need_string(const json& obj, const char* key, const std::string& where) {
  const json& v = need(obj, key, where);
  if (!v.is_string()) bad(where + ": \"" + key + "\" must be a string");
  return v.get<std::string>();
}

std::uint64_t need_uint(const json& obj, const char* key, const std::string& where) {
  const json& v = need(obj, key, where);
  if (!v.is_number_unsigned()) bad(where + ": \"" + key + "\" must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::int64_t need_int(const json& obj, const char* key, const std::string& where) {
  const json& v = need(obj, key, where);
  if (!v.is_number_integer()) bad(where + ": \"" + key + "\" must be an integer");
  return v.get<std::int64_t>();
}

std::vector<std::string> string_list(const json& obj, const char* key, const std::string& where,
                                     bool required = true) {
  if (!obj.contains(key)) {
    if (required) bad(where + ": missing \"" + key + "\"");
    return {};
  }
  const json& v = obj.at(key);
  if (!v.is_array()) bad(where + ": \"" + key + "\" must be a list");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) bad(where + ": \"" + key + "\" must hold strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

wire::MessageType message_type(const std::string& name, const std::string& where) {
  for (int t = 1; t <= 5; ++t) {
    auto type = static_cast<wire::MessageType>(t);
    if (wire::message_name(type) == name) return type;
  }
  bad(where + ": unknown message type " + name);
}

const std::set<std::string> kAdversaryActions = {
    "replay",           "tamper",         "truncate",           "tamper_in_flight",
    "truncate_in_flight", "drop_in_flight", "redirect_in_flight", "steal_device"};

const std::set<std::string> kActions = {
    "register", "login",       "logout",  "auth",           "update_password",
    "advance_clock", "skew",   "replay",  "tamper",         "truncate",
    "tamper_in_flight", "truncate_in_flight", "drop_in_flight", "redirect_in_flight",
    "steal_device"};

bool valid_expect(const std::string& e) {
  if (e == "accept" || e == "reject" || e == "case1" || e == "case2") return true;
  if (e.rfind("reject:", 0) == 0) return error_from_name(e.substr(7)).has_value();
  return false;
}

bool matches(const std::string& expect, const std::string& actual) {
  if (expect.empty()) return true;
  if (expect == "accept") return actual == "accept" || actual == "case1" || actual == "case2";
  if (expect == "reject") return actual.rfind("reject", 0) == 0;
  return expect == actual;
}

struct Declared {
  std::set<std::string> clouds, edges, devices;
  bool any(const std::string& n) const {
    return clouds.count(n) || edges.count(n) || devices.count(n);
  }
};

void declare(Declared& d, const std::string& role, const json& e, const std::string& where) {
  if (role == "cs") {
    d.clouds.insert(need_string(e, "cid", where));
  } else if (role == "es") {
    for (const auto& c : string_list(e, "clouds", where, false)) {
      if (!d.clouds.count(c)) bad(where + ": undeclared cloud server " + c);
    }
    d.edges.insert(need_string(e, "eid", where));
  } else if (role == "device") {
    for (const auto& es : string_list(e, "edges", where)) {
      if (!d.edges.count(es)) bad(where + ": undeclared edge server " + es);
    }
    need_string(e, "uid", where);
    need_string(e, "id", where);
    need_string(e, "password", where);
    d.devices.insert(need_string(e, "name", where));
  } else {
    bad(where + ": unknown role " + role);
  }
}

void check_ref(const std::set<std::string>& set, const json& step, const char* key,
               const std::string& where) {
  const std::string name = need_string(step, key, where);
  if (!set.count(name)) bad(where + ": undeclared entity " + name);
}

void validate_message_ref(const json& step, const std::string& where) {
  const json& m = need(step, "message", where);
  if (m.is_number_unsigned()) return;
  if (m.is_string()) {
    const std::string s = m.get<std::string>();
    if (s.rfind("last:", 0) == 0) {
      message_type(s.substr(5), where);
      return;
    }
  }
  bad(where + ": \"message\" must be an index or \"last:<MsgN>\"");
}

void register_entity(World& w, const std::string& role, const json& e, const std::string& where) {
  if (role == "cs") {
    auto services = string_list(e, "services", where, false);
    w.add_cloud(need_string(e, "cid", where), {services.begin(), services.end()});
  } else if (role == "es") {
    std::string caps = e.contains("capabilities") ? e.at("capabilities").dump() : "{}";
    w.add_edge(need_string(e, "eid", where), string_list(e, "clouds", where, false),
               Capabilities::from_json(caps));
  } else {
    std::optional<std::uint32_t> pool;
    if (e.contains("pool")) pool = static_cast<std::uint32_t>(need_uint(e, "pool", where));
    w.add_device(need_string(e, "name", where), need_string(e, "uid", where),
                 need_string(e, "id", where), need_string(e, "password", where),
                 string_list(e, "edges", where), pool);
  }
}

std::string injected_label(const std::vector<DeliveryOutcome>& outs) {
  if (outs.empty()) return "none";
  for (const auto& o : outs) {
    if (o.accepted) return "accept";
  }
  return outs.front().label();
}

std::size_t resolve_message(World& w, const json& step, const std::string& where) {
  const json& m = step.at("message");
  if (m.is_number_unsigned()) return m.get<std::size_t>();
  auto idx = w.last_message(message_type(m.get<std::string>().substr(5), where));
  if (!idx) bad(where + ": no " + m.get<std::string>().substr(5) + " in the transcript yet");
  return *idx;
}

}  // namespace

Scenario Scenario::parse(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) bad("scenario must be a JSON object");

  Scenario sc;
  sc.name = doc.value("name", std::string("unnamed"));
  if (doc.contains("seed")) sc.config.seed = need_uint(doc, "seed", "scenario");
  if (doc.contains("config")) {
    const json& c = doc.at("config");
    const std::string where = "config";
    if (!c.is_object()) bad("config must be an object");
    auto positive = [&](const char* key) {
      const auto v = need_uint(c, key, where);
      if (v == 0 || v > 0xFFFFFFFFu) bad(where + ": \"" + key + "\" must be positive");
      return static_cast<std::uint32_t>(v);
    };
    if (c.contains("window")) sc.config.window = positive("window");
    if (c.contains("pool_size")) sc.config.pool_size = positive("pool_size");
    if (c.contains("lockout")) sc.config.lockout_limit = positive("lockout");
    if (c.contains("start_time")) sc.config.start_time = positive("start_time");
    if (c.contains("pool_mode")) {
      auto mode = parse_pseudonym_mode(need_string(c, "pool_mode", where));
      if (!mode) bad(where + ": pool_mode must be reuse or single-use");
      sc.config.mode = *mode;
    }
  }

  Declared declared;
  sc.topology = doc.value("topology", json::object());
  if (!sc.topology.is_object()) bad("topology must be an object");
  const std::pair<const char*, const char*> groups[] = {
      {"clouds", "cs"}, {"edges", "es"}, {"devices", "device"}};
  for (const auto& [key, role] : groups) {
    if (!sc.topology.contains(key)) continue;
    const json& list = sc.topology.at(key);
    if (!list.is_array()) bad(std::string("topology.") + key + " must be a list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      declare(declared, role, list[i],
              std::string("topology.") + key + "[" + std::to_string(i) + "]");
    }
  }

  const json& script = need(doc, "script", "scenario");
  if (!script.is_array()) bad("script must be a list");
  for (std::size_t i = 0; i < script.size(); ++i) {
    const json& step = script[i];
    const std::string where = "script[" + std::to_string(i) + "]";
    const std::string action = need_string(step, "action", where);
    if (!kActions.count(action)) bad(where + ": unknown action " + action);
    if (step.contains("expect")) {
      const json& e = step.at("expect");
      if (!e.is_string() || !valid_expect(e.get<std::string>())) {
        bad(where + ": bad expectation " + e.dump());
      }
    }
    if (action == "register") {
      declare(declared, need_string(step, "role", where), step, where);
    } else if (action == "login" || action == "logout") {
      check_ref(declared.devices, step, "device", where);
    } else if (action == "auth") {
      check_ref(declared.devices, step, "device", where);
      check_ref(declared.edges, step, "edge", where);
      need_string(step, "service", where);
    } else if (action == "update_password") {
      check_ref(declared.devices, step, "device", where);
      need_string(step, "old", where);
      need_string(step, "new", where);
    } else if (action == "advance_clock") {
      need_uint(step, "seconds", where);
    } else if (action == "skew") {
      const std::string n = need_string(step, "entity", where);
      if (!declared.any(n)) bad(where + ": undeclared entity " + n);
      need_int(step, "seconds", where);
    } else if (action == "replay") {
      validate_message_ref(step, where);
    } else if (action == "tamper") {
      validate_message_ref(step, where);
      need_uint(step, "offset", where);
      if (need_uint(step, "mask", where) > 0xFF || step.at("mask") == 0) {
        bad(where + ": mask must be 1..255");
      }
    } else if (action == "truncate") {
      validate_message_ref(step, where);
      need_uint(step, "length", where);
    } else if (action == "steal_device") {
      check_ref(declared.devices, step, "device", where);
      check_ref(declared.edges, step, "edge", where);
    } else {  // in-flight actions
      message_type(need_string(step, "message_type", where), where);
      if (action == "tamper_in_flight") {
        need_uint(step, "offset", where);
        if (need_uint(step, "mask", where) > 0xFF || step.at("mask") == 0) {
          bad(where + ": mask must be 1..255");
        }
      } else if (action == "truncate_in_flight") {
        need_uint(step, "length", where);
      } else if (action == "redirect_in_flight") {
        need_string(step, "to", where);
      }
    }
    sc.script.push_back(step);
  }
  return sc;
}

Scenario Scenario::load(const std::string& path) {
  std::string text;
  try {
    text = snapshot::read_file(path);
  } catch (const ProtocolError& e) {
    bad("cannot read scenario " + path + ": " + e.what());
  }
  return parse(text);
}

bool ScenarioResult::passed() const {
  for (const auto& o : outcomes) {
    if (!o.ok) return false;
  }
  return true;
}

ScenarioResult run(const Scenario& scenario) {
  World w(scenario.config);
  const std::pair<const char*, const char*> groups[] = {
      {"clouds", "cs"}, {"edges", "es"}, {"devices", "device"}};
  for (const auto& [key, role] : groups) {
    if (!scenario.topology.contains(key)) continue;
    for (const auto& e : scenario.topology.at(key)) register_entity(w, role, e, "topology");
  }

  ScenarioResult result;
  std::vector<CaseCost> costs;
  Rng adversary_rng(scenario.config.seed, "scenario-adversary");

  for (std::size_t i = 0; i < scenario.script.size(); ++i) {
    const json& step = scenario.script[i];
    const std::string where = "script[" + std::to_string(i) + "]";
    ActionOutcome out;
    out.step = i;
    out.action = step.at("action").get<std::string>();
    out.expect = step.value("expect", std::string());
    w.note("step " + std::to_string(i) + " " + step.dump());
    const std::string& a = out.action;
    try {
      if (a == "register") {
        register_entity(w, step.at("role").get<std::string>(), step, where);
        out.actual = "accept";
      } else if (a == "login") {
        std::optional<std::string> pw;
        if (step.contains("password")) pw = need_string(step, "password", where);
        w.login(step.at("device").get<std::string>(), pw);
        out.actual = "accept";
      } else if (a == "logout") {
        w.logout(step.at("device").get<std::string>());
        out.actual = "accept";
      } else if (a == "auth") {
        AuthRun r = w.authenticate(step.at("device").get<std::string>(),
                                   step.at("edge").get<std::string>(),
                                   step.at("service").get<std::string>());
        out.actual = r.completed && !r.keys_agree() ? "key-mismatch" : r.label();
        if (r.completed) costs.push_back(r.cost);
        result.runs.push_back(std::move(r));
      } else if (a == "update_password") {
        w.update_password(step.at("device").get<std::string>(),
                          step.at("old").get<std::string>(), step.at("new").get<std::string>());
        out.actual = "accept";
      } else if (a == "advance_clock") {
        w.advance_clock(static_cast<std::uint32_t>(step.at("seconds").get<std::uint64_t>()));
        out.actual = "accept";
      } else if (a == "skew") {
        w.set_skew(step.at("entity").get<std::string>(), step.at("seconds").get<std::int64_t>());
        out.actual = "accept";
      } else if (a == "replay") {
        out.actual = injected_label(w.adversary_replay(resolve_message(w, step, where)));
      } else if (a == "tamper") {
        out.actual = injected_label(w.adversary_tamper(
            resolve_message(w, step, where), step.at("offset").get<std::size_t>(),
            static_cast<std::uint8_t>(step.at("mask").get<unsigned>())));
      } else if (a == "truncate") {
        out.actual = injected_label(w.adversary_truncate(resolve_message(w, step, where),
                                                         step.at("length").get<std::size_t>()));
      } else if (a == "steal_device") {
        const std::size_t guesses = step.value("guesses", std::size_t{100});
        auto r = stolen_store_attack(w, step.at("device").get<std::string>(),
                                     step.at("edge").get<std::string>(), guesses,
                                     adversary_rng);
        out.actual = r.accepted == 0 ? "reject:AuthFailure" : "accept";
        w.note("steal_device attempts " + std::to_string(r.attempts) + " accepted " +
               std::to_string(r.accepted) + " insider " +
               (r.insider_accepted ? "accept" : "reject"));
      } else {
        const auto type = message_type(step.at("message_type").get<std::string>(), where);
        if (a == "tamper_in_flight") {
          w.tamper_in_flight(type, step.at("offset").get<std::size_t>(),
                             static_cast<std::uint8_t>(step.at("mask").get<unsigned>()));
        } else if (a == "truncate_in_flight") {
          w.truncate_in_flight(type, step.at("length").get<std::size_t>());
        } else if (a == "drop_in_flight") {
          w.drop_in_flight(type);
        } else {
          w.redirect_in_flight(type, step.at("to").get<std::string>());
        }
        out.actual = "accept";
      }
    } catch (const ProtocolError& e) {
      if (e.code() == ErrorCode::kScenarioError) {
        throw ProtocolError(ErrorCode::kScenarioError, where + ": " + e.what());
      }
      out.actual = "reject:" + std::string(error_name(e.code()));
    }
    out.ok = matches(out.expect, out.actual);
    w.note("step " + std::to_string(i) + " result " + out.actual +
           (out.expect.empty() ? "" : (out.ok ? " (as expected)" : " (expected " + out.expect + ")")));
    result.outcomes.push_back(std::move(out));
  }
  result.cost = summarize(costs);
  result.transcript = w.transcript();
  return result;
}

std::string vacuity_problem(const Scenario& scenario) {
  bool accept = false, reject = false, adversary = false;
  for (const auto& step : scenario.script) {
    const std::string e = step.value("expect", std::string());
    if (e == "accept" || e == "case1" || e == "case2") accept = true;
    if (e.rfind("reject", 0) == 0) reject = true;
    if (kAdversaryActions.count(step.value("action", std::string()))) adversary = true;
  }
  if (!accept) return "no step expects an acceptance";
  if (adversary && !reject) return "adversary actions but no step expects a rejection";
  return {};
}

}  // namespace aeaka::sim
