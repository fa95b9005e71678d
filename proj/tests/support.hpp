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

#ifndef AEAKA_TESTS_SUPPORT_HPP_
#define AEAKA_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <string>

#include "aeaka/crypto.hpp"
#include "oracle/reference.hpp"

namespace testing {

inline oracle::Block32 ob(const aeaka::Digest& d) { return d.bytes; }
inline aeaka::Digest ad(const oracle::Block32& b) { return aeaka::Digest{b}; }

inline bool contains(const std::string& haystack, const aeaka::Digest& needle) {
  return haystack.find(needle.hex()) != std::string::npos ||
         haystack.find(std::string(needle.bytes.begin(), needle.bytes.end())) !=
             std::string::npos;
}

inline bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

inline std::string random_text(aeaka::Rng& rng, std::size_t max_len) {
  static const char alphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789-_:";
  std::string s(rng.uniform(max_len + 1), ' ');
  for (auto& c : s) c = alphabet[rng.uniform(sizeof(alphabet) - 1)];
  return s;
}

}  // namespace testing

#endif  // AEAKA_TESTS_SUPPORT_HPP_
