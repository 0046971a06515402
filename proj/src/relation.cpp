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
#include "pacas/relation.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "pacas/csv.hpp"
#include "pacas/error.hpp"

namespace pacas {

std::optional<size_t> Schema::find(std::string_view attribute) const {
  for (size_t i = 0; i < attributes.size(); ++i) {
    if (attributes[i] == attribute) return i;
  }
  return std::nullopt;
}

size_t Schema::index(std::string_view attribute) const {
  if (auto i = find(attribute)) return *i;
  throw Error(ErrorCode::kUnknownAttribute, "attribute '" + std::string(attribute) + "' is not in the schema");
}

std::vector<size_t> Schema::indices(const std::vector<std::string>& attrs) const {
  std::vector<size_t> out;
  out.reserve(attrs.size());
  for (const auto& a : attrs) out.push_back(index(a));
  return out;
}

Relation::Relation(Schema schema, std::shared_ptr<const HierarchySet> hierarchies)
    : schema_(std::move(schema)), hierarchies_(std::move(hierarchies)) {
  std::set<std::string> seen{schema_.key};
  for (const auto& a : schema_.attributes) {
    if (!seen.insert(a).second) throw Error(ErrorCode::kMalformedInput, "duplicate column '" + a + "'");
    column_hierarchy_.push_back(&hierarchies_->at(a));
  }
}

Relation Relation::from_csv(const std::string& text, std::shared_ptr<const HierarchySet> hierarchies) {
  auto records = csv::parse(text);
  if (records.empty()) throw Error(ErrorCode::kMalformedInput, "relation has no header row");
  Schema schema;
  schema.key = records[0][0];
  schema.attributes.assign(records[0].begin() + 1, records[0].end());
  Relation rel(std::move(schema), std::move(hierarchies));
  for (size_t i = 1; i < records.size(); ++i) {
    auto& rec = records[i];
    if (rec.size() != rel.width() + 1) {
      throw Error(ErrorCode::kMalformedInput, "row " + std::to_string(i) + " has " + std::to_string(rec.size()) +
                                                  " fields, expected " + std::to_string(rel.width() + 1));
    }
    std::string id = std::move(rec[0]);
    rec.erase(rec.begin());
    rel.add(std::move(id), std::move(rec));
  }
  return rel;
}

Relation Relation::load_csv(const std::string& path, std::shared_ptr<const HierarchySet> hierarchies) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMalformedInput, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_csv(buf.str(), std::move(hierarchies));
}

std::string Relation::to_csv() const {
  std::vector<std::string> header{schema_.key};
  header.insert(header.end(), schema_.attributes.begin(), schema_.attributes.end());
  std::string out = csv::format_row(header) + "\n";
  for (size_t r = 0; r < rows_.size(); ++r) {
    std::vector<std::string> fields{ids_[r]};
    fields.insert(fields.end(), rows_[r].begin(), rows_[r].end());
    out += csv::format_row(fields) + "\n";
  }
  return out;
}

std::optional<size_t> Relation::find(std::string_view tuple_id) const {
  auto it = index_.find(std::string(tuple_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

size_t Relation::row_of(std::string_view tuple_id) const {
  if (auto r = find(tuple_id)) return *r;
  throw Error(ErrorCode::kInvalidArgument, "no tuple '" + std::string(tuple_id) + "'");
}

const std::string& Relation::cell(std::string_view tuple_id, std::string_view attribute) const {
  return rows_[row_of(tuple_id)][schema_.index(attribute)];
}

void Relation::check_value(size_t column, const std::string& value) const {
  if (!column_hierarchy_[column]->contains(value)) {
    throw Error(ErrorCode::kUnknownValue,
                "'" + value + "' is not a value of " + schema_.attributes[column]);
  }
}

void Relation::set(size_t r, size_t column, std::string value) {
  check_value(column, value);
  rows_[r][column] = std::move(value);
}

void Relation::add(std::string tuple_id, std::vector<std::string> values) {
  if (values.size() != width()) throw Error(ErrorCode::kSchemaMismatch, "tuple width does not match schema");
  if (index_.count(tuple_id)) throw Error(ErrorCode::kDuplicateTupleId, "tuple id '" + tuple_id + "' repeats");
  for (size_t c = 0; c < values.size(); ++c) {
    if (!column_hierarchy_[c]->contains(values[c])) {
      throw Error(ErrorCode::kUnknownValue, "cell " + tuple_id + "[" + schema_.attributes[c] + "] = '" + values[c] +
                                                "' is not in the hierarchy");
    }
  }
  index_.emplace(tuple_id, rows_.size());
  ids_.push_back(std::move(tuple_id));
  rows_.push_back(std::move(values));
}

void Relation::erase(size_t r) {
  index_.erase(ids_[r]);
  ids_.erase(ids_.begin() + static_cast<std::ptrdiff_t>(r));
  rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(r));
  for (size_t i = r; i < ids_.size(); ++i) index_[ids_[i]] = i;
}

bool Relation::is_ground() const {
  for (const auto& row : rows_) {
    for (size_t c = 0; c < row.size(); ++c) {
      if (!column_hierarchy_[c]->is_ground(row[c])) return false;
    }
  }
  return true;
}

std::unordered_map<std::string, std::string> Relation::tuple_map(size_t r) const {
  std::unordered_map<std::string, std::string> out;
  for (size_t c = 0; c < width(); ++c) out.emplace(schema_.attributes[c], rows_[r][c]);
  return out;
}

namespace {

std::vector<std::string> string_list(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::kMalformedInput, std::string(what) + " must be a list of names");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) throw Error(ErrorCode::kMalformedInput, std::string(what) + " must be a list of names");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::pair<std::string, std::string> attr_pair(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_string()) {
    throw Error(ErrorCode::kMalformedInput, "MD attribute pairs are [client, provider]");
  }
  return {j[0].get<std::string>(), j[1].get<std::string>()};
}

// Rows grouped by their LHS vector, skipping rows with any general LHS value.
std::map<std::vector<std::string>, std::vector<size_t>> ground_lhs_groups(const Relation& r,
                                                                          const std::vector<size_t>& lhs) {
  std::map<std::vector<std::string>, std::vector<size_t>> groups;
  for (size_t row = 0; row < r.size(); ++row) {
    std::vector<std::string> key;
    key.reserve(lhs.size());
    bool ground = true;
    for (size_t c : lhs) {
      const std::string& v = r.at(row, c);
      if (!r.hierarchy(c).is_ground(v)) {
        ground = false;
        break;
      }
      key.push_back(v);
    }
    if (ground) groups[std::move(key)].push_back(row);
  }
  return groups;
}

}  // namespace

Constraints Constraints::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kMalformedInput, "constraint config must be an object");
  Constraints c;
  if (doc.contains("qi")) c.qi = string_list(doc["qi"], "qi");
  if (doc.contains("sensitive")) c.sensitive = string_list(doc["sensitive"], "sensitive");
  for (const auto& a : c.qi) {
    if (std::find(c.sensitive.begin(), c.sensitive.end(), a) != c.sensitive.end()) {
      throw Error(ErrorCode::kMalformedInput, "'" + a + "' is both quasi-identifying and sensitive");
    }
  }
  for (const auto& f : doc.value("fds", nlohmann::json::array())) {
    FD fd{string_list(f.at("lhs"), "fd lhs"), string_list(f.at("rhs"), "fd rhs")};
    if (fd.lhs.empty() || fd.rhs.empty()) throw Error(ErrorCode::kMalformedInput, "FD sides must be nonempty");
    for (const auto& a : fd.lhs) {
      if (std::find(fd.rhs.begin(), fd.rhs.end(), a) != fd.rhs.end()) {
        throw Error(ErrorCode::kMalformedInput, "FD sides overlap on '" + a + "'");
      }
    }
    c.fds.push_back(std::move(fd));
  }
  for (const auto& m : doc.value("mds", nlohmann::json::array())) {
    MD md;
    for (const auto& clause : m.at("match")) {
      auto [cl, sp] = attr_pair(clause);
      md.clauses.push_back({cl, sp, "exact"});
    }
    if (md.clauses.empty()) throw Error(ErrorCode::kMalformedInput, "MD needs at least one match clause");
    if (m.contains("similarity")) {
      const std::string sim = m["similarity"].get<std::string>();
      if (sim != "exact") throw Error(ErrorCode::kMalformedInput, "unsupported MD similarity '" + sim + "'");
    }
    std::tie(md.target_client, md.target_provider) = attr_pair(m.at("target"));
    c.mds.push_back(std::move(md));
  }
  return c;
}

Constraints Constraints::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMalformedInput, "cannot open " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, path + ": " + e.what());
  }
}

nlohmann::json Constraints::to_json() const {
  nlohmann::json fds = nlohmann::json::array();
  for (const auto& fd : this->fds) fds.push_back({{"lhs", fd.lhs}, {"rhs", fd.rhs}});
  nlohmann::json mds = nlohmann::json::array();
  for (const auto& md : this->mds) {
    nlohmann::json match = nlohmann::json::array();
    for (const auto& c : md.clauses) match.push_back({c.client_attr, c.provider_attr});
    mds.push_back({{"match", match}, {"target", {md.target_client, md.target_provider}}});
  }
  return {{"qi", qi}, {"sensitive", sensitive}, {"fds", fds}, {"mds", mds}};
}

std::vector<Violation> find_violations(const Relation& r, const std::vector<FD>& fds) {
  std::vector<Violation> out;
  for (size_t f = 0; f < fds.size(); ++f) {
    const auto lhs = r.schema().indices(fds[f].lhs);
    const auto rhs = r.schema().indices(fds[f].rhs);
    for (const auto& [key, rows] : ground_lhs_groups(r, lhs)) {
      for (size_t i = 0; i < rows.size(); ++i) {
        for (size_t j = i + 1; j < rows.size(); ++j) {
          for (size_t c : rhs) {
            if (!r.hierarchy(c).comparable(r.at(rows[i], c), r.at(rows[j], c))) {
              out.push_back({f, std::min(rows[i], rows[j]), std::max(rows[i], rows[j])});
              break;
            }
          }
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_consistent(const Relation& r, const std::vector<FD>& fds) { return find_violations(r, fds).empty(); }

size_t violating_pair_count(const std::vector<Violation>& violations) {
  std::set<std::pair<size_t, size_t>> pairs;
  for (const auto& v : violations) pairs.emplace(v.a, v.b);
  return pairs.size();
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), size_t{0}); }

  size_t find(size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // The smaller root wins so representatives are stable under input order.
  void unite(size_t a, size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<size_t> parent_;
};

}  // namespace

std::vector<EquivalenceClass> generate_eqs(const Relation& r, const std::vector<FD>& fds) {
  // Columns appearing on some RHS, in schema order.
  std::vector<size_t> rhs_columns;
  for (const auto& fd : fds) {
    for (size_t c : r.schema().indices(fd.rhs)) rhs_columns.push_back(c);
  }
  std::sort(rhs_columns.begin(), rhs_columns.end());
  rhs_columns.erase(std::unique(rhs_columns.begin(), rhs_columns.end()), rhs_columns.end());
  const size_t width = rhs_columns.size();
  auto slot = [&](size_t row, size_t column) {
    return row * width + static_cast<size_t>(std::lower_bound(rhs_columns.begin(), rhs_columns.end(), column) -
                                             rhs_columns.begin());
  };

  DisjointSets sets(r.size() * width);
  for (const auto& fd : fds) {
    const auto lhs = r.schema().indices(fd.lhs);
    const auto rhs = r.schema().indices(fd.rhs);
    for (const auto& [key, rows] : ground_lhs_groups(r, lhs)) {
      for (size_t i = 1; i < rows.size(); ++i) {
        for (size_t c : rhs) sets.unite(slot(rows[0], c), slot(rows[i], c));
      }
    }
  }

  std::map<size_t, size_t> class_of_root;
  std::vector<EquivalenceClass> out;
  for (size_t row = 0; row < r.size(); ++row) {
    for (size_t c : rhs_columns) {
      const size_t root = sets.find(slot(row, c));
      auto [it, fresh] = class_of_root.emplace(root, out.size());
      if (fresh) {
        out.emplace_back();
        out.back().id = static_cast<int>(out.size());
      }
      out[it->second].cells.push_back({r.id(row), r.schema().attributes[c]});
    }
  }
  return out;
}

int error_count(const Relation& r, const std::vector<FD>& fds, const std::vector<Violation>& violations,
                const EquivalenceClass& eq) {
  std::vector<std::pair<size_t, size_t>> cells;
  for (const auto& c : eq.cells) {
    auto row = r.find(c.tuple_id);
    if (!row) throw Error(ErrorCode::kStaleClass, "class " + std::to_string(eq.id) + " references missing tuple '" +
                                                      c.tuple_id + "'");
    cells.emplace_back(*row, r.schema().index(c.attribute));
  }
  std::vector<std::vector<size_t>> fd_columns;
  for (const auto& fd : fds) {
    auto cols = r.schema().indices(fd.lhs);
    auto rhs = r.schema().indices(fd.rhs);
    cols.insert(cols.end(), rhs.begin(), rhs.end());
    fd_columns.push_back(std::move(cols));
  }
  std::set<std::pair<size_t, size_t>> pairs;
  for (const auto& v : violations) {
    const auto& cols = fd_columns[v.fd];
    for (const auto& [row, col] : cells) {
      if ((row == v.a || row == v.b) && std::find(cols.begin(), cols.end(), col) != cols.end()) {
        pairs.emplace(v.a, v.b);
        break;
      }
    }
  }
  return static_cast<int>(pairs.size());
}

int error_count(const Relation& r, const std::vector<FD>& fds, const EquivalenceClass& eq) {
  return error_count(r, fds, find_violations(r, fds), eq);
}

}  // namespace pacas
