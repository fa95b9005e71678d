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

#include "aeaka/sim/channel.hpp"

#include <algorithm>
#include <sstream>

namespace aeaka::sim {

std::string describe(const Envelope& env) {
  std::ostringstream os;
  os << env.src << "->" << env.dst << " corr=" << std::hex << env.correlation << std::dec
     << " len=" << env.payload.size();
  return os.str();
}

void Channel::send(Envelope env) {
  auto key = std::make_pair(env.deliver_at, seq_++);
  queue_.emplace(key, std::move(env));
}

void Channel::inject(Envelope env, const std::string& why) {
  log_.push_back("inject " + describe(env) + " (" + why + ")");
  send(std::move(env));
}

std::size_t Channel::add_interceptor(std::string name, Interceptor hook) {
  std::size_t id = next_hook_id_++;
  hooks_.push_back({id, std::move(name), std::move(hook)});
  return id;
}

void Channel::remove_interceptor(std::size_t id) {
  hooks_.erase(std::remove_if(hooks_.begin(), hooks_.end(),
                              [id](const Hook& h) { return h.id == id; }),
               hooks_.end());
}

void Channel::clear_interceptors() { hooks_.clear(); }

std::optional<Envelope> Channel::next() {
  while (!queue_.empty()) {
    Envelope env = std::move(queue_.begin()->second);
    queue_.erase(queue_.begin());
    bool dropped = false;
    for (const auto& hook : hooks_) {
      Envelope before = env;
      if (hook.fn(env) == InterceptAction::kDrop) {
        log_.push_back("drop " + describe(before) + " by " + hook.name);
        dropped = true;
        break;
      }
      if (!(env == before)) log_.push_back("modify " + describe(before) + " by " + hook.name);
      if (env.deliver_at > before.deliver_at) {
        // Delayed: back into the queue at its new slot.
        log_.push_back("delay " + describe(env) + " until " + std::to_string(env.deliver_at));
        send(std::move(env));
        dropped = true;
        break;
      }
    }
    if (!dropped) return env;
  }
  return std::nullopt;
}

}  // namespace aeaka::sim
