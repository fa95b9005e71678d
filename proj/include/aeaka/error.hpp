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

#ifndef AEAKA_ERROR_HPP_
#define AEAKA_ERROR_HPP_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace aeaka {

enum class ErrorCode {
  kMalformedMessage,
  kUnexpectedMessage,
  kDuplicateRegistration,
  kUnknownCs,
  kUnknownEs,
  kInvalidCount,
  kBadCredentials,
  kLockedOut,
  kEmptyPseudonymPool,
  kStaleTimestamp,
  kReplayDetected,
  kAuthFailure,
  kNoCapableCs,
  kUnknownSession,
  kScenarioError,
  kIoError,
  kAlreadyInitialized,
  kInvalidSnapshot,
};

// Stable names, used in transcripts, scenario expectations and CLI output.
std::string_view error_name(ErrorCode code);
std::optional<ErrorCode> error_from_name(std::string_view name);

class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what),
        code_(code) {}
  explicit ProtocolError(ErrorCode code)
      : std::runtime_error(std::string(error_name(code))), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace aeaka

#endif  // AEAKA_ERROR_HPP_
