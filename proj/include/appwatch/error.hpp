/* Copyright 2026 The AppWatch Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace appwatch {

enum class ErrorCode {
  kValidation,
  kParse,
  kReferential,
  kContract,
  kUnsupportedLatitude,
  kInfeasibleSplit,
  kUnsampledStratum,
  kIntegrity,
  kUnsupportedVersion,
  kProviderIo,
  kNotFound,
  kConflict,
  kUsage,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kReferential: return "referential";
    case ErrorCode::kContract: return "contract";
    case ErrorCode::kUnsupportedLatitude: return "unsupported-latitude";
    case ErrorCode::kInfeasibleSplit: return "infeasible-split";
    case ErrorCode::kUnsampledStratum: return "unsampled-stratum";
    case ErrorCode::kIntegrity: return "integrity";
    case ErrorCode::kUnsupportedVersion: return "unsupported-version";
    case ErrorCode::kProviderIo: return "provider-io";
    case ErrorCode::kNotFound: return "not-found";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kUsage: return "usage";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Provider I/O failures are the only transient class.
  bool retryable() const noexcept { return code_ == ErrorCode::kProviderIo; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace appwatch
