//
// Copyright 2026 The PACAS Authors
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
//
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pacas {

enum class ErrorCode {
  kMalformedHierarchy,
  kMalformedInput,
  kUnknownValue,
  kUnknownAttribute,
  kLevelBelowValue,
  kInvalidArgument,
  kSchemaMismatch,
  kAlignmentMismatch,
  kDuplicateTupleId,
  kStaleClass,
  kEmptyInstanceSet,
  kEmptyRelation,
  kStalePartition,
  kNoApplicableMd,
  kQuoteMismatch,
  kUnsafeRequest,
  kNoMatch,
  kNoClasses,
  kLevelCapViolation,
  kRateInfeasible,
  kProtocol,
};

// Stable snake_case name, also used as the wire error code.
std::string_view error_code_name(ErrorCode code);
ErrorCode error_code_from_name(std::string_view name);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Validation failures (bad inputs) vs. protocol failures, for CLI exit codes.
bool is_protocol_error(ErrorCode code);

}  // namespace pacas
