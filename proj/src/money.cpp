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
#include "pacas/money.hpp"

#include <cmath>

#include <fmt/format.h>

#include "pacas/error.hpp"

namespace pacas {

namespace {
__extension__ using Wide = __int128;
}  // namespace

Money Money::from_double(double amount) {
  if (!std::isfinite(amount)) throw Error(ErrorCode::kInvalidArgument, "amount is not finite");
  return Money(std::llround(amount * kScale));
}

std::string Money::str() const {
  const std::int64_t whole = micros_ / kScale;
  const std::int64_t frac = micros_ % kScale;
  if (frac == 0) return std::to_string(whole);
  std::string s = fmt::format("{}{}.{:06d}", micros_ < 0 && whole == 0 ? "-" : "", whole, std::llabs(frac));
  while (s.back() == '0') s.pop_back();
  return s;
}

Money Money::scaled(std::int64_t num, std::int64_t den) const {
  if (den <= 0) throw Error(ErrorCode::kInvalidArgument, "non-positive denominator");
  const Wide v = static_cast<Wide>(micros_) * num;
  Wide q = v / den;
  if (v % den != 0 && v < 0) --q;
  return Money(static_cast<std::int64_t>(q));
}

nlohmann::json price_to_json(const Price& p) {
  if (!p) return "infinite";
  if (p->micros() % Money::kScale == 0) return p->micros() / Money::kScale;
  return p->to_double();
}

Price price_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "infinite") return std::nullopt;
    throw Error(ErrorCode::kProtocol, "price string must be \"infinite\"");
  }
  if (j.is_number_integer()) return Money::units(j.get<std::int64_t>());
  if (j.is_number()) return Money::from_double(j.get<double>());
  throw Error(ErrorCode::kProtocol, "price must be a number or \"infinite\"");
}

std::string price_str(const Price& p) { return p ? p->str() : "infinite"; }

}  // namespace pacas
