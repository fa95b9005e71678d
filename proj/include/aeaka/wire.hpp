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

// Canonical field encoding and the bit-exact message codec.
//
// Field encodings (shared by the wire and by every hash input):
//   Digest     32 raw bytes
//   Timestamp  4 bytes, big-endian
//   string     4-byte big-endian length, then the raw bytes
//
// A message is a 1-byte type tag followed by its fields in protocol order.
// For the five AKA messages SerReq is the last field. docs/wire-format.md
// has the byte tables.

#ifndef AEAKA_WIRE_HPP_
#define AEAKA_WIRE_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aeaka/crypto.hpp"

namespace aeaka::wire {

Bytes field(const Digest& d);
Bytes field(Timestamp t);
Bytes field(std::string_view s);
Bytes field(ByteView b);
inline Bytes field(const Bytes& b) { return field(ByteView(b)); }
inline Bytes field(const char* s) { return field(std::string_view(s)); }
inline Bytes field(const std::string& s) { return field(std::string_view(s)); }

// h(f1 || f2 || ...) over canonical field encodings.
template <typename... Fields>
Digest hash_fields(const Fields&... fields) {
  return hash({field(fields)...});
}

enum class MessageType : std::uint8_t {
  kAuthRequest = 0x01,    // Msg1  device -> ES
  kEdgeResponse = 0x02,   // Msg2  ES -> device (Case 1)
  kCloudRequest = 0x03,   // Msg3  ES -> CS
  kCloudResponse = 0x04,  // Msg4  CS -> ES
  kEdgeRelay = 0x05,      // Msg5  ES -> device (Case 2)
  kCsRegistrationRequest = 0x10,
  kCsRegistrationResponse = 0x11,
  kEsRegistrationRequest = 0x12,
  kEsRegistrationResponse = 0x13,
  kDeviceRegistrationRequest = 0x14,
  kDeviceRegistrationResponse = 0x15,
};

std::string_view message_name(MessageType type);

struct AuthRequest {
  Digest pid;
  Digest m1;
  Digest alpha;
  Timestamp t;
  Bytes ser_req;
  bool operator==(const AuthRequest&) const = default;
};

struct EdgeResponse {
  Digest m2;
  Digest beta;
  Timestamp t;
  bool operator==(const EdgeResponse&) const = default;
};

struct CloudRequest {
  Digest pid;
  Digest m3;
  Digest theta;
  Timestamp t;
  Bytes ser_req;
  bool operator==(const CloudRequest&) const = default;
};

struct CloudResponse {
  Digest m4;
  Digest nu;
  Timestamp t;
  bool operator==(const CloudResponse&) const = default;
};

struct EdgeRelay {
  Digest m5;
  Digest epsilon;
  Timestamp t;
  bool operator==(const EdgeRelay&) const = default;
};

struct CsRegistrationRequest {
  std::string cid;
  bool operator==(const CsRegistrationRequest&) const = default;
};

struct CsRegistrationResponse {
  Digest sc;
  Digest secret_key;
  Digest pk_digest;
  bool operator==(const CsRegistrationResponse&) const = default;
};

struct EsRegistrationRequest {
  std::string eid;
  std::vector<std::string> target_cs;
  bool operator==(const EsRegistrationRequest&) const = default;
};

struct E2CEntry {
  std::string cid;
  Digest pid;
  Digest credential;
  bool operator==(const E2CEntry&) const = default;
};

struct EsRegistrationResponse {
  Digest se;
  Digest secret_key;
  Digest pk_digest;
  std::vector<E2CEntry> e2c;
  bool operator==(const EsRegistrationResponse&) const = default;
};

struct DeviceRegistrationRequest {
  std::string uid;
  std::string device_id;
  Digest epw;
  std::vector<std::string> target_es;
  std::uint32_t pool_size = 0;
  bool operator==(const DeviceRegistrationRequest&) const = default;
};

// One ES's slice of a device registration: positional (pid, b) pairs.
struct PseudonymBundle {
  Digest es;  // h(PK_j)
  std::vector<Digest> pids;
  std::vector<Digest> masked;
  bool operator==(const PseudonymBundle&) const = default;
};

struct DeviceRegistrationResponse {
  Digest did;
  Digest secret_key;
  std::vector<PseudonymBundle> bundles;
  bool operator==(const DeviceRegistrationResponse&) const = default;
};

using Message = std::variant<AuthRequest, EdgeResponse, CloudRequest,
                             CloudResponse, EdgeRelay, CsRegistrationRequest,
                             CsRegistrationResponse, EsRegistrationRequest,
                             EsRegistrationResponse, DeviceRegistrationRequest,
                             DeviceRegistrationResponse>;

MessageType type_of(const Message& msg);

Bytes encode(const Message& msg);

// Throws ProtocolError(kMalformedMessage) on an unknown tag, a truncated
// field or length prefix, or trailing bytes.
Message decode(ByteView bytes);

// Protocol payload size in bits: digests, timestamps, identity strings and
// counts as carried. SerReq, the type tag and all length/count prefixes are
// framing and are not counted.
std::size_t accounted_bits(const Message& msg);

}  // namespace aeaka::wire

#endif  // AEAKA_WIRE_HPP_
