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

// Primitive layer: 256-bit digests, the protocol hash, XOR masking, nonces
// and clocks. Everything above this file speaks in Digest values.

#ifndef AEAKA_CRYPTO_HPP_
#define AEAKA_CRYPTO_HPP_

#include <array>
#include <atomic>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aeaka {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline constexpr std::size_t kDigestSize = 32;
inline constexpr std::size_t kDigestBits = kDigestSize * 8;
inline constexpr std::size_t kTimestampSize = 4;
inline constexpr std::size_t kTimestampBits = kTimestampSize * 8;

struct Digest {
  std::array<std::uint8_t, kDigestSize> bytes{};

  auto operator<=>(const Digest&) const = default;

  ByteView view() const { return {bytes.data(), bytes.size()}; }
  bool is_zero() const;
  std::string hex() const;

  // Throws std::invalid_argument unless `hex` is exactly 64 hex digits.
  static Digest from_hex(std::string_view hex);
  static Digest from_bytes(ByteView bytes);
};

// Nonces are full-width so that masking (M = a ^ x) stays Digest ^ Digest.
using Nonce = Digest;

struct Timestamp {
  std::uint32_t value = 0;

  auto operator<=>(const Timestamp&) const = default;
};

Digest operator^(const Digest& a, const Digest& b);
inline Digest xor_digests(const Digest& a, const Digest& b) { return a ^ b; }

// Comparison for received authenticators; runtime does not depend on where
// the first mismatching byte is.
bool constant_time_equal(const Digest& a, const Digest& b);

// SHA-256 over the plain concatenation of `parts`. Callers pass canonically
// encoded fields (see wire.hpp), so concatenation is unambiguous. Each call
// counts once against every active HashCountScope on this thread.
Digest hash(std::span<const Bytes> parts);
Digest hash(std::initializer_list<Bytes> parts);

class HashCounter {
 public:
  std::uint64_t count() const { return count_.load(std::memory_order_relaxed); }
  void reset() { count_.store(0, std::memory_order_relaxed); }
  void add(std::uint64_t n) { count_.fetch_add(n, std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t> count_{0};
};

// Attributes every hash() call made on the current thread, for the lifetime
// of the scope, to `counter`. Scopes nest; an inner call counts against all
// enclosing scopes.
class HashCountScope {
 public:
  explicit HashCountScope(HashCounter& counter);
  ~HashCountScope();

  HashCountScope(const HashCountScope&) = delete;
  HashCountScope& operator=(const HashCountScope&) = delete;

 private:
  friend void count_hash_invocation();
  HashCounter& counter_;
  HashCountScope* outer_;
};

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
 public:
  Timestamp now() const override;
};

class SimClock final : public Clock {
 public:
  explicit SimClock(std::uint32_t start = 0) : now_(start) {}

  Timestamp now() const override { return {now_.load()}; }
  void set(std::uint32_t seconds) { now_.store(seconds); }
  void advance(std::uint32_t seconds) { now_.fetch_add(seconds); }

 private:
  std::atomic<std::uint32_t> now_;
};

// A view of another clock shifted by a fixed number of seconds.
class SkewedClock final : public Clock {
 public:
  SkewedClock(const Clock& base, std::int64_t skew) : base_(base), skew_(skew) {}

  Timestamp now() const override;
  void set_skew(std::int64_t skew) { skew_ = skew; }
  std::int64_t skew() const { return skew_; }

 private:
  const Clock& base_;
  std::int64_t skew_;
};

inline constexpr std::uint32_t kDefaultFreshnessWindow = 5;

// True iff 0 <= now - t <= window. Future-dated timestamps are rejected.
// Throws std::invalid_argument when window is zero.
bool fresh(Timestamp t, Timestamp now, std::uint32_t window);

// Seedable random source. Draws are serialized, so one handle may be shared
// by concurrent sessions. The engine is mt19937_64, whose output sequence is
// fixed by the standard; bounded draws avoid std distributions for the same
// reason.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  // Independent stream for a named entity under a scenario seed.
  Rng(std::uint64_t seed, std::string_view label);

  static Rng from_entropy();

  Rng(const Rng&) = delete;
  Rng& operator=(const Rng&) = delete;

  std::uint64_t next_u64();
  void fill(std::span<std::uint8_t> out);
  // Uniform in [0, bound). bound must be positive.
  std::uint64_t uniform(std::uint64_t bound);

  // Engine state in the standard textual form, for persisted entities.
  std::string save_state() const;
  void restore_state(const std::string& state);

 private:
  mutable std::mutex mu_;
  std::mt19937_64 engine_;
};

Nonce random_nonce(Rng& rng);

// Best-effort wipe of secret material that is about to go out of scope.
void secure_wipe(std::span<std::uint8_t> bytes);
inline void secure_wipe(Digest& d) { secure_wipe(std::span<std::uint8_t>(d.bytes)); }

std::string to_hex(ByteView bytes);
Bytes from_hex(std::string_view hex);  // throws std::invalid_argument

}  // namespace aeaka

#endif  // AEAKA_CRYPTO_HPP_
