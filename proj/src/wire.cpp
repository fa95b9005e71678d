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

#include "aeaka/wire.hpp"

#include <limits>
#include <type_traits>

#include "aeaka/error.hpp"

namespace aeaka::wire {

namespace {

void put_u32(Bytes& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t checked_length(std::size_t n) {
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw std::length_error("field longer than 2^32-1 bytes");
  }
  return static_cast<std::uint32_t>(n);
}

class Writer {
 public:
  explicit Writer(MessageType type) { out_.push_back(static_cast<std::uint8_t>(type)); }

  Writer& digest(const Digest& d) {
    out_.insert(out_.end(), d.bytes.begin(), d.bytes.end());
    return *this;
  }
  Writer& timestamp(Timestamp t) {
    put_u32(out_, t.value);
    return *this;
  }
  Writer& u32(std::uint32_t v) {
    put_u32(out_, v);
    return *this;
  }
  Writer& bytes(ByteView b) {
    put_u32(out_, checked_length(b.size()));
    out_.insert(out_.end(), b.begin(), b.end());
    return *this;
  }
  Writer& str(std::string_view s) {
    return bytes(ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  }
  Writer& strings(const std::vector<std::string>& v) {
    u32(checked_length(v.size()));
    for (const auto& s : v) str(s);
    return *this;
  }
  Writer& digests(const std::vector<Digest>& v) {
    u32(checked_length(v.size()));
    for (const auto& d : v) digest(d);
    return *this;
  }

  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(ByteView in) : in_(in) {}

  Digest digest() {
    need(kDigestSize, "digest");
    Digest d;
    std::copy_n(in_.begin() + pos_, kDigestSize, d.bytes.begin());
    pos_ += kDigestSize;
    return d;
  }
  std::uint32_t u32() {
    need(4, "integer");
    std::uint32_t v = (std::uint32_t{in_[pos_]} << 24) |
                      (std::uint32_t{in_[pos_ + 1]} << 16) |
                      (std::uint32_t{in_[pos_ + 2]} << 8) |
                      std::uint32_t{in_[pos_ + 3]};
    pos_ += 4;
    return v;
  }
  Timestamp timestamp() { return {u32()}; }
  Bytes bytes() {
    std::uint32_t n = u32();
    need(n, "length-prefixed field");
    Bytes b(in_.begin() + pos_, in_.begin() + pos_ + n);
    pos_ += n;
    return b;
  }
  std::string str() {
    Bytes b = bytes();
    return std::string(b.begin(), b.end());
  }
  // Counts are bounded by what the remaining input could possibly hold, so a
  // forged count cannot drive a huge allocation.
  std::uint32_t count(std::size_t min_element_size) {
    std::uint32_t n = u32();
    if (min_element_size > 0 && n > remaining() / min_element_size) {
      throw ProtocolError(ErrorCode::kMalformedMessage, "element count exceeds input");
    }
    return n;
  }
  std::vector<std::string> strings() {
    std::vector<std::string> v(count(4));
    for (auto& s : v) s = str();
    return v;
  }
  std::vector<Digest> digests() {
    std::vector<Digest> v(count(kDigestSize));
    for (auto& d : v) d = digest();
    return v;
  }
  void finish() const {
    if (pos_ != in_.size()) {
      throw ProtocolError(ErrorCode::kMalformedMessage, "trailing bytes");
    }
  }

 private:
  std::size_t remaining() const { return in_.size() - pos_; }
  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw ProtocolError(ErrorCode::kMalformedMessage,
                          std::string("truncated ") + what);
    }
  }

  ByteView in_;
  std::size_t pos_ = 0;
};

template <class>
inline constexpr bool kAlwaysFalse = false;

}  // namespace

Bytes field(const Digest& d) { return Bytes(d.bytes.begin(), d.bytes.end()); }

Bytes field(Timestamp t) {
  Bytes out;
  put_u32(out, t.value);
  return out;
}

Bytes field(std::string_view s) {
  return field(ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

Bytes field(ByteView b) {
  Bytes out;
  out.reserve(4 + b.size());
  put_u32(out, checked_length(b.size()));
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::string_view message_name(MessageType type) {
  switch (type) {
    case MessageType::kAuthRequest: return "Msg1";
    case MessageType::kEdgeResponse: return "Msg2";
    case MessageType::kCloudRequest: return "Msg3";
    case MessageType::kCloudResponse: return "Msg4";
    case MessageType::kEdgeRelay: return "Msg5";
    case MessageType::kCsRegistrationRequest: return "CsRegReq";
    case MessageType::kCsRegistrationResponse: return "CsRegResp";
    case MessageType::kEsRegistrationRequest: return "EsRegReq";
    case MessageType::kEsRegistrationResponse: return "EsRegResp";
    case MessageType::kDeviceRegistrationRequest: return "DevRegReq";
    case MessageType::kDeviceRegistrationResponse: return "DevRegResp";
  }
  return "Unknown";
}

MessageType type_of(const Message& msg) {
  return std::visit(
      [](const auto& m) -> MessageType {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AuthRequest>) return MessageType::kAuthRequest;
        else if constexpr (std::is_same_v<T, EdgeResponse>) return MessageType::kEdgeResponse;
        else if constexpr (std::is_same_v<T, CloudRequest>) return MessageType::kCloudRequest;
        else if constexpr (std::is_same_v<T, CloudResponse>) return MessageType::kCloudResponse;
        else if constexpr (std::is_same_v<T, EdgeRelay>) return MessageType::kEdgeRelay;
        else if constexpr (std::is_same_v<T, CsRegistrationRequest>) return MessageType::kCsRegistrationRequest;
        else if constexpr (std::is_same_v<T, CsRegistrationResponse>) return MessageType::kCsRegistrationResponse;
        else if constexpr (std::is_same_v<T, EsRegistrationRequest>) return MessageType::kEsRegistrationRequest;
        else if constexpr (std::is_same_v<T, EsRegistrationResponse>) return MessageType::kEsRegistrationResponse;
        else if constexpr (std::is_same_v<T, DeviceRegistrationRequest>) return MessageType::kDeviceRegistrationRequest;
        else if constexpr (std::is_same_v<T, DeviceRegistrationResponse>) return MessageType::kDeviceRegistrationResponse;
        else static_assert(kAlwaysFalse<T>);
      },
      msg);
}

Bytes encode(const Message& msg) {
  Writer w(type_of(msg));
  std::visit(
      [&w](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AuthRequest>) {
          w.digest(m.pid).digest(m.m1).digest(m.alpha).timestamp(m.t).bytes(m.ser_req);
        } else if constexpr (std::is_same_v<T, EdgeResponse>) {
          w.digest(m.m2).digest(m.beta).timestamp(m.t);
        } else if constexpr (std::is_same_v<T, CloudRequest>) {
          w.digest(m.pid).digest(m.m3).digest(m.theta).timestamp(m.t).bytes(m.ser_req);
        } else if constexpr (std::is_same_v<T, CloudResponse>) {
          w.digest(m.m4).digest(m.nu).timestamp(m.t);
        } else if constexpr (std::is_same_v<T, EdgeRelay>) {
          w.digest(m.m5).digest(m.epsilon).timestamp(m.t);
        } else if constexpr (std::is_same_v<T, CsRegistrationRequest>) {
          w.str(m.cid);
        } else if constexpr (std::is_same_v<T, CsRegistrationResponse>) {
          w.digest(m.sc).digest(m.secret_key).digest(m.pk_digest);
        } else if constexpr (std::is_same_v<T, EsRegistrationRequest>) {
          w.str(m.eid).strings(m.target_cs);
        } else if constexpr (std::is_same_v<T, EsRegistrationResponse>) {
          w.digest(m.se).digest(m.secret_key).digest(m.pk_digest);
          w.u32(checked_length(m.e2c.size()));
          for (const auto& e : m.e2c) w.str(e.cid).digest(e.pid).digest(e.credential);
        } else if constexpr (std::is_same_v<T, DeviceRegistrationRequest>) {
          w.str(m.uid).str(m.device_id).digest(m.epw).strings(m.target_es).u32(m.pool_size);
        } else if constexpr (std::is_same_v<T, DeviceRegistrationResponse>) {
          w.digest(m.did).digest(m.secret_key);
          w.u32(checked_length(m.bundles.size()));
          for (const auto& b : m.bundles) w.digest(b.es).digests(b.pids).digests(b.masked);
        } else {
          static_assert(kAlwaysFalse<T>);
        }
      },
      msg);
  return w.take();
}

Message decode(ByteView bytes) {
  if (bytes.empty()) throw ProtocolError(ErrorCode::kMalformedMessage, "empty message");
  Reader r(bytes.subspan(1));
  Message out;
  switch (static_cast<MessageType>(bytes[0])) {
    case MessageType::kAuthRequest: {
      AuthRequest m;
      m.pid = r.digest();
      m.m1 = r.digest();
      m.alpha = r.digest();
      m.t = r.timestamp();
      m.ser_req = r.bytes();
      out = std::move(m);
      break;
    }
    case MessageType::kEdgeResponse: {
      EdgeResponse m;
      m.m2 = r.digest();
      m.beta = r.digest();
      m.t = r.timestamp();
      out = m;
      break;
    }
    case MessageType::kCloudRequest: {
      CloudRequest m;
      m.pid = r.digest();
      m.m3 = r.digest();
      m.theta = r.digest();
      m.t = r.timestamp();
      m.ser_req = r.bytes();
      out = std::move(m);
      break;
    }
    case MessageType::kCloudResponse: {
      CloudResponse m;
      m.m4 = r.digest();
      m.nu = r.digest();
      m.t = r.timestamp();
      out = m;
      break;
    }
    case MessageType::kEdgeRelay: {
      EdgeRelay m;
      m.m5 = r.digest();
      m.epsilon = r.digest();
      m.t = r.timestamp();
      out = m;
      break;
    }
    case MessageType::kCsRegistrationRequest: {
      out = CsRegistrationRequest{r.str()};
      break;
    }
    case MessageType::kCsRegistrationResponse: {
      CsRegistrationResponse m;
      m.sc = r.digest();
      m.secret_key = r.digest();
      m.pk_digest = r.digest();
      out = m;
      break;
    }
    case MessageType::kEsRegistrationRequest: {
      EsRegistrationRequest m;
      m.eid = r.str();
      m.target_cs = r.strings();
      out = std::move(m);
      break;
    }
    case MessageType::kEsRegistrationResponse: {
      EsRegistrationResponse m;
      m.se = r.digest();
      m.secret_key = r.digest();
      m.pk_digest = r.digest();
      m.e2c.resize(r.count(4 + 2 * kDigestSize));
      for (auto& e : m.e2c) {
        e.cid = r.str();
        e.pid = r.digest();
        e.credential = r.digest();
      }
      out = std::move(m);
      break;
    }
    case MessageType::kDeviceRegistrationRequest: {
      DeviceRegistrationRequest m;
      m.uid = r.str();
      m.device_id = r.str();
      m.epw = r.digest();
      m.target_es = r.strings();
      m.pool_size = r.u32();
      out = std::move(m);
      break;
    }
    case MessageType::kDeviceRegistrationResponse: {
      DeviceRegistrationResponse m;
      m.did = r.digest();
      m.secret_key = r.digest();
      m.bundles.resize(r.count(kDigestSize + 8));
      for (auto& b : m.bundles) {
        b.es = r.digest();
        b.pids = r.digests();
        b.masked = r.digests();
      }
      out = std::move(m);
      break;
    }
    default:
      throw ProtocolError(ErrorCode::kMalformedMessage, "unknown message tag");
  }
  r.finish();
  return out;
}

std::size_t accounted_bits(const Message& msg) {
  constexpr std::size_t d = kDigestBits;
  constexpr std::size_t t = kTimestampBits;
  return std::visit(
      [](const auto& m) -> std::size_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AuthRequest> || std::is_same_v<T, CloudRequest>) {
          return 3 * d + t;
        } else if constexpr (std::is_same_v<T, EdgeResponse> ||
                             std::is_same_v<T, CloudResponse> ||
                             std::is_same_v<T, EdgeRelay>) {
          return 2 * d + t;
        } else if constexpr (std::is_same_v<T, CsRegistrationRequest>) {
          return 8 * m.cid.size();
        } else if constexpr (std::is_same_v<T, CsRegistrationResponse>) {
          return 3 * d;
        } else if constexpr (std::is_same_v<T, EsRegistrationRequest>) {
          std::size_t bits = 8 * m.eid.size();
          for (const auto& c : m.target_cs) bits += 8 * c.size();
          return bits;
        } else if constexpr (std::is_same_v<T, EsRegistrationResponse>) {
          std::size_t bits = 3 * d;
          for (const auto& e : m.e2c) bits += 8 * e.cid.size() + 2 * d;
          return bits;
        } else if constexpr (std::is_same_v<T, DeviceRegistrationRequest>) {
          std::size_t bits = 8 * (m.uid.size() + m.device_id.size()) + d + 32;
          for (const auto& e : m.target_es) bits += 8 * e.size();
          return bits;
        } else if constexpr (std::is_same_v<T, DeviceRegistrationResponse>) {
          std::size_t bits = 2 * d;
          for (const auto& b : m.bundles) bits += d + d * (b.pids.size() + b.masked.size());
          return bits;
        } else {
          static_assert(kAlwaysFalse<T>);
        }
      },
      msg);
}

}  // namespace aeaka::wire
