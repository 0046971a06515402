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

#include <iosfwd>
#include <string>
#include <vector>

namespace pacas::csv {

// RFC 4180 records: quoted fields may hold commas, quotes ("") and newlines.
// Blank lines are skipped. Throws Error(kMalformedInput) on an unterminated
// quote.
std::vector<std::vector<std::string>> parse(std::istream& in);
std::vector<std::vector<std::string>> parse(const std::string& text);

std::string format_row(const std::vector<std::string>& fields);

}  // namespace pacas::csv
