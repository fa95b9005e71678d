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

#ifndef AEAKA_CLOUD_SERVER_HPP_
#define AEAKA_CLOUD_SERVER_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "aeaka/crypto.hpp"
#include "aeaka/wire.hpp"

namespace aeaka {

struct CloudConfig {
  std::uint32_t freshness_window = kDefaultFreshnessWindow;
};

struct CloudCredentials {
  std::string cid;
  Digest sc;
  Digest secret_key;
  Digest pk_digest;
};

struct CloudResult {
  wire::CloudResponse msg4;
  Digest session_key;    // sk_ki
  Digest device_handle;  // S'_{i,j}, the only handle on the anonymous device
};

class CloudServer {
 public:
  static std::unique_ptr<CloudServer> from_registration(const std::string& cid,
                                                        const wire::CsRegistrationResponse& reply,
                                                        std::set<std::string> services = {},
                                                        CloudConfig config = {});
  static std::unique_ptr<CloudServer> from_snapshot(std::string_view text, CloudConfig config = {});

  CloudServer(CloudCredentials creds, std::set<std::string> services, CloudConfig config);

  CloudServer(const CloudServer&) = delete;
  CloudServer& operator=(const CloudServer&) = delete;

  CloudResult handle_msg3(const wire::CloudRequest& msg3, Rng& rng, const Clock& clock);

  const std::string& cid() const { return creds_.cid; }
  const CloudCredentials& credentials() const { return creds_; }
  const std::set<std::string>& services() const { return services_; }
  std::optional<Digest> session_key(const Digest& device_handle) const;
  std::vector<std::string> log() const;

  std::string to_snapshot() const;
  std::string dump_state() const;

 private:
  using ReplayKey = std::tuple<Digest, std::uint32_t, Digest>;  // (pid_{j,k}, T, theta)

  void note(std::string line);

  CloudCredentials creds_;
  std::set<std::string> services_;
  CloudConfig config_;

  mutable std::mutex mu_;
  std::map<ReplayKey, Timestamp> replay_cache_;
  std::map<Digest, Digest> session_keys_;
  std::vector<std::string> log_;
};

}  // namespace aeaka

#endif  // AEAKA_CLOUD_SERVER_HPP_
