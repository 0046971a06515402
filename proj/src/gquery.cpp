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
#include "pacas/gquery.hpp"

#include <algorithm>

#include "pacas/error.hpp"

namespace pacas {

nlohmann::json GeneralizedQuery::to_json() const {
  nlohmann::json sel = nlohmann::json::array();
  auto sorted = selection;
  std::sort(sorted.begin(), sorted.end(),
            [](const Predicate& a, const Predicate& b) { return std::tie(a.attribute, a.value) < std::tie(b.attribute, b.value); });
  for (const auto& p : sorted) sel.push_back({p.attribute, p.value});
  return {{"select", sel}, {"project", projection}, {"levels", levels}};
}

std::string GeneralizedQuery::fingerprint() const { return to_json().dump(); }

CompiledQuery::CompiledQuery(const GeneralizedQuery& g, const Relation& schema_source) : levels_(g.levels) {
  if (g.levels.size() != g.projection.size()) {
    throw Error(ErrorCode::kInvalidArgument, "query needs one level per projected attribute");
  }
  const Schema& s = schema_source.schema();
  for (const auto& p : g.selection) selection_.emplace_back(s.index(p.attribute), p.value);
  for (size_t i = 0; i < g.projection.size(); ++i) {
    const size_t c = s.index(g.projection[i]);
    const int l = g.levels[i];
    if (l < 0 || l > schema_source.hierarchy(c).height()) {
      throw Error(ErrorCode::kInvalidArgument, "level " + std::to_string(l) + " is not a level of " + g.projection[i]);
    }
    projection_.push_back(c);
    hierarchies_.push_back(&schema_source.hierarchy(c));
  }
}

bool CompiledQuery::matches(const std::vector<std::string>& row) const {
  for (const auto& [c, v] : selection_) {
    if (row[c] != v) return false;
  }
  return true;
}

std::vector<std::string> CompiledQuery::project(const std::vector<std::string>& row) const {
  std::vector<std::string> out;
  out.reserve(projection_.size());
  for (size_t i = 0; i < projection_.size(); ++i) {
    out.push_back(hierarchies_[i]->generalize_to(row[projection_[i]], levels_[i]));
  }
  return out;
}

Answer CompiledQuery::eval(const Relation& r) const {
  Answer out;
  for (size_t row = 0; row < r.size(); ++row) {
    if (matches(r.row(row))) out.insert(project(r.row(row)));
  }
  return out;
}

Answer eval_gq(const GeneralizedQuery& g, const Relation& r) { return CompiledQuery(g, r).eval(r); }

Answer eval_ground(const GeneralizedQuery& q, const Relation& r) {
  Answer out;
  std::vector<size_t> cols;
  for (const auto& a : q.projection) cols.push_back(r.schema().index(a));
  std::vector<std::pair<size_t, std::string>> sel;
  for (const auto& p : q.selection) sel.emplace_back(r.schema().index(p.attribute), p.value);
  for (size_t row = 0; row < r.size(); ++row) {
    bool hit = true;
    for (const auto& [c, v] : sel) {
      if (r.at(row, c) != v) {
        hit = false;
        break;
      }
    }
    if (!hit) continue;
    std::vector<std::string> t;
    for (size_t c : cols) t.push_back(r.at(row, c));
    out.insert(std::move(t));
  }
  return out;
}

GeneralizedQuery xgroup_query(const Relation& r, size_t row, const std::vector<std::string>& x,
                              const std::vector<std::string>& y, const std::vector<int>& levels) {
  GeneralizedQuery g;
  for (const auto& a : x) g.selection.push_back({a, r.at(row, r.schema().index(a))});
  for (const auto& a : y) r.schema().index(a);
  g.projection = y;
  g.levels = levels;
  return g;
}

}  // namespace pacas
