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

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "pacas/hierarchy.hpp"

namespace pacas {

struct Schema {
  std::string key = "ID";
  std::vector<std::string> attributes;

  std::optional<size_t> find(std::string_view attribute) const;
  size_t index(std::string_view attribute) const;  // throws kUnknownAttribute
  std::vector<size_t> indices(const std::vector<std::string>& attrs) const;

  friend bool operator==(const Schema&, const Schema&) = default;
};

// Tabular instance whose cells may hold values from any level of their
// attribute's hierarchy. Every write is checked against the hierarchy.
class Relation {
 public:
  Relation(Schema schema, std::shared_ptr<const HierarchySet> hierarchies);

  // CSV with a header row; the first column is the tuple id.
  static Relation from_csv(const std::string& text, std::shared_ptr<const HierarchySet> hierarchies);
  static Relation load_csv(const std::string& path, std::shared_ptr<const HierarchySet> hierarchies);
  std::string to_csv() const;

  const Schema& schema() const { return schema_; }
  const HierarchySet& hierarchies() const { return *hierarchies_; }
  const std::shared_ptr<const HierarchySet>& hierarchies_ptr() const { return hierarchies_; }
  const Hierarchy& hierarchy(size_t column) const { return *column_hierarchy_[column]; }

  size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  size_t width() const { return schema_.attributes.size(); }

  const std::string& id(size_t row) const { return ids_[row]; }
  std::optional<size_t> find(std::string_view tuple_id) const;
  size_t row_of(std::string_view tuple_id) const;  // throws kInvalidArgument

  const std::vector<std::string>& row(size_t r) const { return rows_[r]; }
  const std::string& at(size_t r, size_t column) const { return rows_[r][column]; }
  const std::string& cell(std::string_view tuple_id, std::string_view attribute) const;

  void set(size_t r, size_t column, std::string value);
  void add(std::string tuple_id, std::vector<std::string> values);
  void erase(size_t r);

  bool is_ground() const;
  // Tuple id -> {attribute: value}; the form a client sends to a provider.
  std::unordered_map<std::string, std::string> tuple_map(size_t r) const;

  friend bool operator==(const Relation& a, const Relation& b) {
    return a.schema_ == b.schema_ && a.ids_ == b.ids_ && a.rows_ == b.rows_;
  }

 private:
  void check_value(size_t column, const std::string& value) const;

  Schema schema_;
  std::shared_ptr<const HierarchySet> hierarchies_;
  std::vector<const Hierarchy*> column_hierarchy_;
  std::vector<std::string> ids_;
  std::vector<std::vector<std::string>> rows_;
  std::unordered_map<std::string, size_t> index_;
};

struct FD {
  std::vector<std::string> lhs;
  std::vector<std::string> rhs;
};

struct MDClause {
  std::string client_attr;
  std::string provider_attr;
  std::string similarity = "exact";
};

// Client/provider matching rule: agreement on every clause identifies the
// target attribute across the two relations.
struct MD {
  std::vector<MDClause> clauses;
  std::string target_client;
  std::string target_provider;
};

// Schema roles and constraints shared by client and provider.
struct Constraints {
  std::vector<std::string> qi;
  std::vector<std::string> sensitive;
  std::vector<FD> fds;
  std::vector<MD> mds;

  static Constraints from_json(const nlohmann::json& doc);
  static Constraints load(const std::string& path);
  nlohmann::json to_json() const;
};

// A tuple pair violating one FD; rows are ordered a < b.
struct Violation {
  size_t fd = 0;
  size_t a = 0;
  size_t b = 0;

  friend bool operator==(const Violation&, const Violation&) = default;
  friend auto operator<=>(const Violation&, const Violation&) = default;
};

// Generalized consistency: tuples with equal, all-ground LHS vectors must
// carry ⪯-comparable values on every RHS attribute. Sorted by (fd, a, b).
std::vector<Violation> find_violations(const Relation& r, const std::vector<FD>& fds);
bool is_consistent(const Relation& r, const std::vector<FD>& fds);
// Distinct unordered tuple pairs violating at least one FD.
size_t violating_pair_count(const std::vector<Violation>& violations);

struct Cell {
  std::string tuple_id;
  std::string attribute;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct EquivalenceClass {
  int id = 0;
  std::vector<Cell> cells;  // in relation row order
  int error_count = 0;
};

// Union-find closure over RHS cells: two cells of attribute B merge when their
// tuples agree on the ground LHS of some FD with B on its right. Includes
// singleton classes. Ids are 1-based in order of each class's first cell.
std::vector<EquivalenceClass> generate_eqs(const Relation& r, const std::vector<FD>& fds);

// Distinct violating tuple pairs (unioned over FDs) in which some cell of eq
// takes part, i.e. the cell's tuple is in the pair and its attribute is
// mentioned by the violated FD. Throws kStaleClass for vanished tuples.
int error_count(const Relation& r, const std::vector<FD>& fds, const EquivalenceClass& eq);
int error_count(const Relation& r, const std::vector<FD>& fds, const std::vector<Violation>& violations,
                const EquivalenceClass& eq);

}  // namespace pacas
