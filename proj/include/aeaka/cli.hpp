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

#ifndef AEAKA_CLI_HPP_
#define AEAKA_CLI_HPP_

#include <iostream>

namespace aeaka::cli {

// Exit codes: 0 success, 1 protocol or authentication failure, 2 usage or
// configuration error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitProtocol = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `aeaka` tool. Passwords not given as flags are read
// from `in`, one per line.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
            std::istream& in);

}  // namespace aeaka::cli

#endif  // AEAKA_CLI_HPP_
