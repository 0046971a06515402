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
#include "pacas/error.hpp"

#include <array>
#include <utility>

namespace pacas {

namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 21> kNames = {{
    {ErrorCode::kMalformedHierarchy, "malformed_hierarchy"},
    {ErrorCode::kMalformedInput, "malformed_input"},
    {ErrorCode::kUnknownValue, "unknown_value"},
    {ErrorCode::kUnknownAttribute, "unknown_attribute"},
    {ErrorCode::kLevelBelowValue, "level_below_value"},
    {ErrorCode::kInvalidArgument, "invalid_argument"},
    {ErrorCode::kSchemaMismatch, "schema_mismatch"},
    {ErrorCode::kAlignmentMismatch, "alignment_mismatch"},
    {ErrorCode::kDuplicateTupleId, "duplicate_tuple_id"},
    {ErrorCode::kStaleClass, "stale_class"},
    {ErrorCode::kEmptyInstanceSet, "empty_instance_set"},
    {ErrorCode::kEmptyRelation, "empty_relation"},
    {ErrorCode::kStalePartition, "stale_partition"},
    {ErrorCode::kNoApplicableMd, "no_applicable_md"},
    {ErrorCode::kQuoteMismatch, "quote_mismatch"},
    {ErrorCode::kUnsafeRequest, "unsafe_request"},
    {ErrorCode::kNoMatch, "no_match"},
    {ErrorCode::kNoClasses, "no_classes"},
    {ErrorCode::kLevelCapViolation, "level_cap_violation"},
    {ErrorCode::kRateInfeasible, "rate_infeasible"},
    {ErrorCode::kProtocol, "protocol_error"},
}};

}  // namespace

std::string_view error_code_name(ErrorCode code) {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "unknown";
}

ErrorCode error_code_from_name(std::string_view name) {
  for (const auto& [c, n] : kNames) {
    if (n == name) return c;
  }
  return ErrorCode::kProtocol;
}

bool is_protocol_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kProtocol:
    case ErrorCode::kQuoteMismatch:
    case ErrorCode::kUnsafeRequest:
    case ErrorCode::kNoMatch:
    case ErrorCode::kNoApplicableMd:
    case ErrorCode::kStalePartition:
      return true;
    default:
      return false;
  }
}

}  // namespace pacas
