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

#include "aeaka/error.hpp"

#include <array>
#include <utility>

namespace aeaka {

namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 18> kNames{{
    {ErrorCode::kMalformedMessage, "MalformedMessage"},
    {ErrorCode::kUnexpectedMessage, "UnexpectedMessage"},
    {ErrorCode::kDuplicateRegistration, "DuplicateRegistration"},
    {ErrorCode::kUnknownCs, "UnknownCs"},
    {ErrorCode::kUnknownEs, "UnknownEs"},
    {ErrorCode::kInvalidCount, "InvalidCount"},
    {ErrorCode::kBadCredentials, "BadCredentials"},
    {ErrorCode::kLockedOut, "LockedOut"},
    {ErrorCode::kEmptyPseudonymPool, "EmptyPseudonymPool"},
    {ErrorCode::kStaleTimestamp, "StaleTimestamp"},
    {ErrorCode::kReplayDetected, "ReplayDetected"},
    {ErrorCode::kAuthFailure, "AuthFailure"},
    {ErrorCode::kNoCapableCs, "NoCapableCs"},
    {ErrorCode::kUnknownSession, "UnknownSession"},
    {ErrorCode::kScenarioError, "ScenarioError"},
    {ErrorCode::kIoError, "IoError"},
    {ErrorCode::kAlreadyInitialized, "AlreadyInitialized"},
    {ErrorCode::kInvalidSnapshot, "InvalidSnapshot"},
}};

}  // namespace

std::string_view error_name(ErrorCode code) {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "Unknown";
}

std::optional<ErrorCode> error_from_name(std::string_view name) {
  for (const auto& [c, n] : kNames) {
    if (n == name) return c;
  }
  return std::nullopt;
}

}  // namespace aeaka
