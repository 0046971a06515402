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

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "pacas/anonymity.hpp"
#include "pacas/gquery.hpp"
#include "pacas/money.hpp"
#include "pacas/relation.hpp"

namespace pacas {

enum class DeltaKind { kUpdate, kInsert, kDelete };

// One edit turning the reference relation into a neighbouring instance.
struct Delta {
  DeltaKind kind = DeltaKind::kUpdate;
  std::string tuple_id;             // edited, deleted or inserted tuple
  std::string attribute;            // update only
  std::string value;                // update only
  std::vector<std::string> values;  // insert only

  nlohmann::json to_json() const;
  static Delta from_json(const nlohmann::json& j);

  friend bool operator==(const Delta&, const Delta&) = default;
};

struct Member {
  std::uint64_t id = 0;
  Delta delta;
  Money weight = Money::units(1);
};

struct NeighborMix {
  double update = 0.70;
  double insert = 0.15;
  double remove = 0.15;
};

// Finite sample of neighbour instances standing in for the possible
// instances. Members are kept as deltas over the reference relation and
// walked row by row; a full instance is only built by materialize().
class SupportSet {
 public:
  SupportSet(std::shared_ptr<const Relation> reference, std::vector<Member> members, std::uint64_t seed);

  // `size` distinct neighbours drawn from the seed. Replacement and inserted
  // values come from the ground values observed per attribute in reference.
  // Throws kEmptyRelation for an empty reference.
  static SupportSet build(std::shared_ptr<const Relation> reference, size_t size, std::uint64_t seed,
                          const NeighborMix& mix = {});

  const Relation& reference() const { return *reference_; }
  const std::shared_ptr<const Relation>& reference_ptr() const { return reference_; }
  const std::vector<Member>& members() const { return members_; }
  size_t size() const { return members_.size(); }
  std::uint64_t seed() const { return seed_; }
  // Bumped whenever members are dropped.
  std::uint64_t epoch() const { return epoch_; }
  Money total_weight() const;

  Relation materialize(size_t i) const;

  // Calls fn(row) for every row of member i without copying the reference.
  template <class Fn>
  void for_each_row(size_t i, Fn&& fn) const;

  // Keeps only the listed member ids.
  void retain(const std::vector<std::uint64_t>& ids);

  nlohmann::json to_json() const;
  static SupportSet from_json(const nlohmann::json& j, std::shared_ptr<const Relation> reference);

 private:
  std::shared_ptr<const Relation> reference_;
  std::vector<Member> members_;
  std::uint64_t seed_ = 0;
  std::uint64_t epoch_ = 0;
};

// Members agreeing with the true answer (S_G) vs. conflicting ones (C_G).
struct Partition {
  std::vector<std::uint64_t> agree;
  std::vector<std::uint64_t> conflict;
  std::uint64_t epoch = 0;
};

struct PriceQuote {
  Price amount;  // nullopt when the safety gate fired
  std::string fingerprint;
  Partition partition;
};

// Weighted cover: sum of weights of members whose answer differs from d's.
Money baseline_price(const GeneralizedQuery& q, const Relation& d, const SupportSet& s);

// Conflict-weight price, or infinite when some tuple of r would see fewer than
// k values at the spec levels across the agreeing members.
PriceQuote safe_price(const GeneralizedQuery& g, const Relation& r, const SupportSet& s, const AnonymitySpec& spec);

// S <- S_G. Throws kStalePartition if s changed since the quote.
void commit_sale(SupportSet& s, const Partition& partition);

// SafePrice bound to one support set and spec, with each member's X-group
// index built once and dropped along with the member.
class Pricer {
 public:
  Pricer(SupportSet support, AnonymitySpec spec);

  PriceQuote quote(const GeneralizedQuery& g) const;
  void commit(const Partition& partition);

  const SupportSet& support() const { return support_; }
  const AnonymitySpec& spec() const { return spec_; }

 private:
  SupportSet support_;
  AnonymitySpec spec_;
  std::vector<GroupIndex> indexes_;  // aligned with support_.members()
};

template <class Fn>
void SupportSet::for_each_row(size_t i, Fn&& fn) const {
  const Delta& d = members_[i].delta;
  const Relation& ref = *reference_;
  size_t target = ref.size();
  size_t column = 0;
  if (d.kind != DeltaKind::kInsert) {
    if (auto r = ref.find(d.tuple_id)) target = *r;
    if (d.kind == DeltaKind::kUpdate) column = ref.schema().index(d.attribute);
  }
  std::vector<std::string> edited;
  for (size_t r = 0; r < ref.size(); ++r) {
    if (r != target) {
      fn(ref.row(r));
    } else if (d.kind == DeltaKind::kUpdate) {
      edited = ref.row(r);
      edited[column] = d.value;
      fn(static_cast<const std::vector<std::string>&>(edited));
    }
  }
  if (d.kind == DeltaKind::kInsert) fn(static_cast<const std::vector<std::string>&>(d.values));
}

}  // namespace pacas
