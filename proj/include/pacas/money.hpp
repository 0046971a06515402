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

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

namespace pacas {

// Fixed-point amount in millionths of a unit. Budgets and prices travel
// between processes, so sums must not depend on floating-point order.
class Money {
 public:
  static constexpr std::int64_t kScale = 1'000'000;

  constexpr Money() = default;
  static constexpr Money from_micros(std::int64_t micros) { return Money(micros); }
  static constexpr Money units(std::int64_t n) { return Money(n * kScale); }
  static Money from_double(double amount);

  constexpr std::int64_t micros() const { return micros_; }
  double to_double() const { return static_cast<double>(micros_) / kScale; }
  std::string str() const;

  // floor(this * num / den), without intermediate overflow.
  Money scaled(std::int64_t num, std::int64_t den) const;

  constexpr Money operator+(Money o) const { return Money(micros_ + o.micros_); }
  constexpr Money operator-(Money o) const { return Money(micros_ - o.micros_); }
  Money& operator+=(Money o) { micros_ += o.micros_; return *this; }
  Money& operator-=(Money o) { micros_ -= o.micros_; return *this; }
  constexpr auto operator<=>(const Money&) const = default;

 private:
  constexpr explicit Money(std::int64_t micros) : micros_(micros) {}
  std::int64_t micros_ = 0;
};

// A price quote amount; nullopt is the infinite price.
using Price = std::optional<Money>;

nlohmann::json price_to_json(const Price& p);
Price price_from_json(const nlohmann::json& j);  // throws kProtocol
std::string price_str(const Price& p);

}  // namespace pacas
