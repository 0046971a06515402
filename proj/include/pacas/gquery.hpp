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

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "pacas/relation.hpp"

namespace pacas {

struct Predicate {
  std::string attribute;
  std::string value;

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

// Select-project query with one output level per projected attribute.
// Selections compare values syntactically.
struct GeneralizedQuery {
  std::vector<Predicate> selection;
  std::vector<std::string> projection;
  std::vector<int> levels;

  // Canonical serialization; equal for queries with identical semantics.
  std::string fingerprint() const;
  nlohmann::json to_json() const;

  friend bool operator==(const GeneralizedQuery&, const GeneralizedQuery&) = default;
};

using Answer = std::set<std::vector<std::string>>;

// Q(R) with the levels ignored.
Answer eval_ground(const GeneralizedQuery& q, const Relation& r);
// Ground answers lifted cell-wise to the query levels, as a set.
Answer eval_gq(const GeneralizedQuery& g, const Relation& r);

// G^t = <Q^t, L>: selection binds X to row's values, projection Y at L.
GeneralizedQuery xgroup_query(const Relation& r, size_t row, const std::vector<std::string>& x,
                              const std::vector<std::string>& y, const std::vector<int>& levels);

// Column indices and level checks resolved once; evaluation in a loop then
// avoids name lookups.
class CompiledQuery {
 public:
  CompiledQuery(const GeneralizedQuery& g, const Relation& schema_source);

  bool matches(const std::vector<std::string>& row) const;
  std::vector<std::string> project(const std::vector<std::string>& row) const;
  Answer eval(const Relation& r) const;

 private:
  std::vector<std::pair<size_t, std::string>> selection_;
  std::vector<size_t> projection_;
  std::vector<const Hierarchy*> hierarchies_;
  std::vector<int> levels_;
};

}  // namespace pacas
