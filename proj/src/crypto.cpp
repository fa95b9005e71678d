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

#include "aeaka/crypto.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "aeaka/error.hpp"

namespace aeaka {

namespace {

thread_local HashCountScope* active_scope = nullptr;

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

}  // namespace

void count_hash_invocation() {
  for (HashCountScope* s = active_scope; s != nullptr; s = s->outer_) {
    s->counter_.add(1);
  }
}

HashCountScope::HashCountScope(HashCounter& counter)
    : counter_(counter), outer_(active_scope) {
  active_scope = this;
}

HashCountScope::~HashCountScope() { active_scope = outer_; }

bool Digest::is_zero() const {
  for (auto b : bytes) {
    if (b != 0) return false;
  }
  return true;
}

std::string Digest::hex() const { return to_hex(view()); }

Digest Digest::from_hex(std::string_view hex) {
  if (hex.size() != 2 * kDigestSize) {
    throw std::invalid_argument("digest hex must be 64 characters");
  }
  return from_bytes(aeaka::from_hex(hex));
}

Digest Digest::from_bytes(ByteView bytes) {
  if (bytes.size() != kDigestSize) {
    throw std::invalid_argument("digest must be 32 bytes");
  }
  Digest d;
  std::copy(bytes.begin(), bytes.end(), d.bytes.begin());
  return d;
}

Digest operator^(const Digest& a, const Digest& b) {
  Digest out;
  for (std::size_t i = 0; i < kDigestSize; ++i) {
    out.bytes[i] = static_cast<std::uint8_t>(a.bytes[i] ^ b.bytes[i]);
  }
  return out;
}

bool constant_time_equal(const Digest& a, const Digest& b) {
  std::uint8_t diff = 0;
  for (std::size_t i = 0; i < kDigestSize; ++i) diff |= a.bytes[i] ^ b.bytes[i];
  return diff == 0;
}

Digest hash(std::span<const Bytes> parts) {
  std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 initialisation failed");
  }
  for (const auto& part : parts) {
    if (!part.empty() &&
        EVP_DigestUpdate(ctx.get(), part.data(), part.size()) != 1) {
      throw std::runtime_error("SHA-256 update failed");
    }
  }
  Digest out;
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), out.bytes.data(), &len) != 1 ||
      len != kDigestSize) {
    throw std::runtime_error("SHA-256 finalisation failed");
  }
  count_hash_invocation();
  return out;
}

Digest hash(std::initializer_list<Bytes> parts) {
  return hash(std::span<const Bytes>(parts.begin(), parts.size()));
}

Timestamp SystemClock::now() const {
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(
                  std::chrono::system_clock::now().time_since_epoch())
                  .count();
  return {static_cast<std::uint32_t>(secs)};
}

Timestamp SkewedClock::now() const {
  auto shifted = static_cast<std::int64_t>(base_.now().value) + skew_;
  return {static_cast<std::uint32_t>(shifted)};
}

bool fresh(Timestamp t, Timestamp now, std::uint32_t window) {
  if (window == 0) throw std::invalid_argument("freshness window must be positive");
  if (t.value > now.value) return false;
  return now.value - t.value <= window;
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng::Rng(std::uint64_t seed, std::string_view label) {
  // FNV-1a over the label, folded into the seed through splitmix64.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : label) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  std::uint64_t state = seed ^ h;
  engine_.seed(splitmix64(state));
}

Rng Rng::from_entropy() {
  std::random_device rd;
  std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  return Rng(seed);
}

std::uint64_t Rng::next_u64() {
  std::lock_guard<std::mutex> lock(mu_);
  return engine_();
}

void Rng::fill(std::span<std::uint8_t> out) {
  std::lock_guard<std::mutex> lock(mu_);
  std::size_t i = 0;
  while (i < out.size()) {
    std::uint64_t word = engine_();
    for (int b = 0; b < 8 && i < out.size(); ++b, ++i) {
      out[i] = static_cast<std::uint8_t>(word >> (8 * b));
    }
  }
}

std::uint64_t Rng::uniform(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform bound must be positive");
  // Reject the short tail so every residue is equally likely.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::lock_guard<std::mutex> lock(mu_);
  for (;;) {
    std::uint64_t v = engine_();
    if (v < limit) return v % bound;
  }
}

std::string Rng::save_state() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::ostringstream os;
  os << engine_;
  return os.str();
}

void Rng::restore_state(const std::string& state) {
  std::lock_guard<std::mutex> lock(mu_);
  std::istringstream is(state);
  std::mt19937_64 engine;
  is >> engine;
  if (is.fail()) {
    throw ProtocolError(ErrorCode::kInvalidSnapshot, "bad rng state");
  }
  engine_ = engine;
}

Nonce random_nonce(Rng& rng) {
  Nonce n;
  rng.fill(n.bytes);
  return n;
}

void secure_wipe(std::span<std::uint8_t> bytes) {
  volatile std::uint8_t* p = bytes.data();
  for (std::size_t i = 0; i < bytes.size(); ++i) p[i] = 0;
}

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("odd-length hex string");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("invalid hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

}  // namespace aeaka
