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

#include <array>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "pacas/hierarchy.hpp"
#include "pacas/relation.hpp"

namespace pacas {

// Empirical distribution of an attribute's ground values in a reference
// relation. General values in the reference are not counted.
struct Distribution {
  std::string attribute;
  std::unordered_map<std::string, std::int64_t> counts;
  std::int64_t total = 0;

  static Distribution from_relation(const Relation& r, std::string_view attribute);
  std::int64_t count(std::string_view value) const;
};

// E(v) = P(X in base(v)) * H(X | X in base(v)), in bits, computed straight
// from the counts. Zero-count ground values contribute nothing.
double penalty(const Distribution& dist, const Hierarchy& h, std::string_view v);
// Semantic distance: |E(v) - E(u)| for comparable values, otherwise the sum
// of both legs through the least common ancestor.
double distance(const Distribution& dist, const Hierarchy& h, std::string_view u, std::string_view v);

// Penalties for every node of one hierarchy under one distribution.
class PenaltyTable {
 public:
  PenaltyTable(const Hierarchy& h, const Distribution& dist);

  const Hierarchy& hierarchy() const { return *h_; }
  double penalty(std::string_view v) const { return e_[h_->id(v)]; }
  double penalty(Hierarchy::NodeId id) const { return e_[id]; }
  double distance(std::string_view u, std::string_view v) const;
  double distance(Hierarchy::NodeId u, Hierarchy::NodeId v) const;

 private:
  const Hierarchy* h_;
  std::vector<double> e_;
};

enum class Bucket { kQuarter, kHalf, kThreeQuarters, kFull };
constexpr std::array<const char*, 4> kBucketLabels = {"0-0.25", "0.25-0.5", "0.5-0.75", "0.75-1"};

Bucket bucket_for_ratio(double ratio);

struct BucketHistogram {
  std::array<int, 4> counts{};

  void add(Bucket b) { ++counts[static_cast<size_t>(b)]; }
  int total() const { return counts[0] + counts[1] + counts[2] + counts[3]; }
  double fraction(Bucket b) const;
  nlohmann::json to_json() const;
};

// Penalty tables for every attribute of a schema, over one reference
// relation. Built once and read-only afterwards.
class Metrics {
 public:
  Metrics(const Relation& reference, const std::vector<std::string>& attributes);
  explicit Metrics(const Relation& reference);

  const PenaltyTable& table(std::string_view attribute) const;
  double penalty(std::string_view attribute, std::string_view v) const { return table(attribute).penalty(v); }
  double distance(std::string_view attribute, std::string_view u, std::string_view v) const {
    return table(attribute).distance(u, v);
  }

  // Tuples are compared cell by cell over a's schema.
  double tuple_distance(const Relation& a, size_t row_a, const Relation& b, size_t row_b) const;
  // Tuples are aligned by id. Throws kSchemaMismatch / kAlignmentMismatch.
  double relation_distance(const Relation& a, const Relation& b) const;

  // delta(truth, repair) / delta(truth, root), clamped to [0, 1]; 0/0 is 0.
  double normalized(std::string_view attribute, std::string_view truth, std::string_view repair) const;
  Bucket bucket(std::string_view attribute, std::string_view truth, std::string_view repair) const {
    return bucket_for_ratio(normalized(attribute, truth, repair));
  }

 private:
  std::shared_ptr<const HierarchySet> hierarchies_;
  std::map<std::string, PenaltyTable, std::less<>> tables_;
};

}  // namespace pacas
