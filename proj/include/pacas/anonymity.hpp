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

#include <map>
#include <string>
#include <vector>

#include "pacas/gquery.hpp"
#include "pacas/relation.hpp"

namespace pacas {

struct AnonymitySpec {
  std::vector<std::string> x;
  std::vector<std::string> y;
  std::vector<int> levels;  // one per attribute of y
  int k = 1;

  // Throws kInvalidArgument / kUnknownAttribute against the relation.
  void validate(const Relation& r) const;
};

// X-vector -> distinct Y-vectors lifted to the spec levels, over one relation.
// One pass answers G^t for every t sharing an X-vector.
class GroupIndex {
 public:
  // Empty index over the columns of schema_source.
  GroupIndex(const Relation& schema_source, const AnonymitySpec& spec);
  static GroupIndex over(const Relation& r, const AnonymitySpec& spec);

  void add(const std::vector<std::string>& row);
  const Answer& answers(const std::vector<std::string>& x_values) const;

 private:
  std::vector<size_t> x_columns_;
  std::vector<size_t> y_columns_;
  std::vector<const Hierarchy*> y_hierarchies_;
  std::vector<int> levels_;
  std::map<std::vector<std::string>, Answer> groups_;
  Answer empty_;
};

std::vector<std::string> x_values(const Relation& r, size_t row, const std::vector<size_t>& x_columns);

// |G^t(R)| for each row t of R.
std::vector<size_t> group_sizes(const Relation& r, const AnonymitySpec& spec);

bool is_xy_anonymous(const Relation& r, const std::vector<std::string>& x, const std::vector<std::string>& y, int k);
bool is_xyl_anonymous(const Relation& r, const AnonymitySpec& spec);

// Instances whose answer to g equals g(R) form I_G; g is safe when, for every
// t in R, the union of G^t over I_G holds at least k values.
// Throws kEmptyInstanceSet when instances is empty.
bool is_safe_query(const GeneralizedQuery& g, const Relation& r, const std::vector<const Relation*>& instances,
                   const AnonymitySpec& spec);

// The per-tuple check shared with the pricing gate: every row's X-vector sees
// at least k values across the given indexes.
bool unions_reach_k(const Relation& r, const AnonymitySpec& spec, const std::vector<const GroupIndex*>& indexes);

}  // namespace pacas
