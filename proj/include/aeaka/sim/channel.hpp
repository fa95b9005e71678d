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

// In-process network under full adversary control: every envelope passes
// through the ordered interceptor list on its way out of the queue, and
// anything the adversary does is logged.

#ifndef AEAKA_SIM_CHANNEL_HPP_
#define AEAKA_SIM_CHANNEL_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aeaka/crypto.hpp"

namespace aeaka::sim {

// Transport framing. `correlation` ties a reply to its request and is not
// part of any protocol message.
struct Envelope {
  std::string src;
  std::string dst;
  std::uint64_t correlation = 0;
  Bytes payload;
  std::uint32_t deliver_at = 0;

  bool operator==(const Envelope&) const = default;
};

enum class InterceptAction { kPass, kDrop };

// May rewrite the envelope in place (payload, destination, delivery time).
using Interceptor = std::function<InterceptAction(Envelope&)>;

class Channel {
 public:
  void send(Envelope env);
  // Adversary insertion; logged as such, then treated like any other send.
  void inject(Envelope env, const std::string& why);

  std::size_t add_interceptor(std::string name, Interceptor hook);
  void remove_interceptor(std::size_t id);
  void clear_interceptors();

  // Next envelope in (deliver_at, send order) order after the interceptors
  // ran; dropped envelopes are logged and skipped.
  std::optional<Envelope> next();
  bool empty() const { return queue_.empty(); }

  const std::vector<std::string>& log() const { return log_; }

 private:
  struct Hook {
    std::size_t id;
    std::string name;
    Interceptor fn;
  };

  std::map<std::pair<std::uint32_t, std::uint64_t>, Envelope> queue_;
  std::uint64_t seq_ = 0;
  std::vector<Hook> hooks_;
  std::size_t next_hook_id_ = 0;
  std::vector<std::string> log_;
};

std::string describe(const Envelope& env);

}  // namespace aeaka::sim

#endif  // AEAKA_SIM_CHANNEL_HPP_
