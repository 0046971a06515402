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
#include "pacas/anonymity.hpp"

#include "pacas/error.hpp"

namespace pacas {

void AnonymitySpec::validate(const Relation& r) const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  if (levels.size() != y.size()) throw Error(ErrorCode::kInvalidArgument, "need one level per sensitive attribute");
  r.schema().indices(x);
  const auto ys = r.schema().indices(y);
  for (size_t i = 0; i < ys.size(); ++i) {
    if (levels[i] < 0 || levels[i] > r.hierarchy(ys[i]).height()) {
      throw Error(ErrorCode::kInvalidArgument, "level " + std::to_string(levels[i]) + " is not a level of " + y[i]);
    }
  }
}

std::vector<std::string> x_values(const Relation& r, size_t row, const std::vector<size_t>& x_columns) {
  std::vector<std::string> out;
  out.reserve(x_columns.size());
  for (size_t c : x_columns) out.push_back(r.at(row, c));
  return out;
}

GroupIndex::GroupIndex(const Relation& schema_source, const AnonymitySpec& spec)
    : x_columns_(schema_source.schema().indices(spec.x)),
      y_columns_(schema_source.schema().indices(spec.y)),
      levels_(spec.levels) {
  for (size_t c : y_columns_) y_hierarchies_.push_back(&schema_source.hierarchy(c));
}

GroupIndex GroupIndex::over(const Relation& r, const AnonymitySpec& spec) {
  GroupIndex index(r, spec);
  for (size_t row = 0; row < r.size(); ++row) index.add(r.row(row));
  return index;
}

void GroupIndex::add(const std::vector<std::string>& row) {
  std::vector<std::string> x;
  x.reserve(x_columns_.size());
  for (size_t c : x_columns_) x.push_back(row[c]);
  std::vector<std::string> lifted;
  lifted.reserve(y_columns_.size());
  for (size_t i = 0; i < y_columns_.size(); ++i) {
    lifted.push_back(y_hierarchies_[i]->generalize_to(row[y_columns_[i]], levels_[i]));
  }
  groups_[std::move(x)].insert(std::move(lifted));
}

const Answer& GroupIndex::answers(const std::vector<std::string>& x) const {
  auto it = groups_.find(x);
  return it == groups_.end() ? empty_ : it->second;
}

std::vector<size_t> group_sizes(const Relation& r, const AnonymitySpec& spec) {
  spec.validate(r);
  const GroupIndex index = GroupIndex::over(r, spec);
  const auto xs = r.schema().indices(spec.x);
  std::vector<size_t> out;
  out.reserve(r.size());
  for (size_t row = 0; row < r.size(); ++row) out.push_back(index.answers(x_values(r, row, xs)).size());
  return out;
}

bool is_xyl_anonymous(const Relation& r, const AnonymitySpec& spec) {
  for (size_t n : group_sizes(r, spec)) {
    if (n < static_cast<size_t>(spec.k)) return false;
  }
  return true;
}

bool is_xy_anonymous(const Relation& r, const std::vector<std::string>& x, const std::vector<std::string>& y, int k) {
  return is_xyl_anonymous(r, AnonymitySpec{x, y, std::vector<int>(y.size(), 0), k});
}

bool unions_reach_k(const Relation& r, const AnonymitySpec& spec, const std::vector<const GroupIndex*>& indexes) {
  const auto xs = r.schema().indices(spec.x);
  const size_t k = static_cast<size_t>(spec.k);
  // Rows sharing an X-vector share the union; check each vector once.
  std::map<std::vector<std::string>, bool> checked;
  for (size_t row = 0; row < r.size(); ++row) {
    auto x = x_values(r, row, xs);
    auto [it, fresh] = checked.emplace(std::move(x), true);
    if (!fresh) continue;
    Answer all;
    for (const GroupIndex* index : indexes) {
      const Answer& a = index->answers(it->first);
      all.insert(a.begin(), a.end());
      if (all.size() >= k) break;
    }
    if (all.size() < k) return false;
  }
  return true;
}

bool is_safe_query(const GeneralizedQuery& g, const Relation& r, const std::vector<const Relation*>& instances,
                   const AnonymitySpec& spec) {
  if (instances.empty()) throw Error(ErrorCode::kEmptyInstanceSet, "no candidate instances");
  spec.validate(r);
  const Answer truth = eval_gq(g, r);
  std::vector<GroupIndex> indexes;
  for (const Relation* inst : instances) {
    if (eval_gq(g, *inst) == truth) indexes.push_back(GroupIndex::over(*inst, spec));
  }
  std::vector<const GroupIndex*> ptrs;
  for (const auto& i : indexes) ptrs.push_back(&i);
  return unions_reach_k(r, spec, ptrs);
}

}  // namespace pacas
