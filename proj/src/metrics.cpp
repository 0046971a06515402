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
#include "pacas/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "pacas/error.hpp"

namespace pacas {

Distribution Distribution::from_relation(const Relation& r, std::string_view attribute) {
  Distribution d;
  d.attribute = std::string(attribute);
  const size_t c = r.schema().index(attribute);
  const Hierarchy& h = r.hierarchy(c);
  for (size_t row = 0; row < r.size(); ++row) {
    const std::string& v = r.at(row, c);
    if (!h.is_ground(v)) continue;
    ++d.counts[v];
    ++d.total;
  }
  return d;
}

std::int64_t Distribution::count(std::string_view value) const {
  auto it = counts.find(std::string(value));
  return it == counts.end() ? 0 : it->second;
}

namespace {

// -sum (c/total) log2(c/mass) over the counts of one base set.
double weighted_entropy(const std::vector<std::int64_t>& counts, std::int64_t total) {
  std::int64_t mass = 0;
  for (auto c : counts) mass += c;
  if (mass == 0 || total == 0) return 0.0;
  double e = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    e -= static_cast<double>(c) / total * std::log2(static_cast<double>(c) / mass);
  }
  return e;
}

}  // namespace

double penalty(const Distribution& dist, const Hierarchy& h, std::string_view v) {
  std::vector<std::int64_t> counts;
  for (const auto& u : h.base(v)) counts.push_back(dist.count(u));
  return weighted_entropy(counts, dist.total);
}

double distance(const Distribution& dist, const Hierarchy& h, std::string_view u, std::string_view v) {
  if (h.comparable(u, v)) return std::fabs(penalty(dist, h, v) - penalty(dist, h, u));
  const std::string a = h.lca(u, v);
  return distance(dist, h, u, a) + distance(dist, h, a, v);
}

PenaltyTable::PenaltyTable(const Hierarchy& h, const Distribution& dist) : h_(&h), e_(h.size(), 0.0) {
  for (Hierarchy::NodeId id = 0; id < static_cast<Hierarchy::NodeId>(h.size()); ++id) {
    if (h.level(id) == 0) continue;
    std::vector<std::int64_t> counts;
    for (auto leaf : h.base_ids(id)) counts.push_back(dist.count(h.value(leaf)));
    e_[id] = weighted_entropy(counts, dist.total);
  }
}

double PenaltyTable::distance(Hierarchy::NodeId u, Hierarchy::NodeId v) const {
  if (h_->generalizes(u, v) || h_->generalizes(v, u)) return std::fabs(e_[v] - e_[u]);
  const auto a = h_->lca(u, v);
  return (e_[a] - e_[u]) + (e_[a] - e_[v]);
}

double PenaltyTable::distance(std::string_view u, std::string_view v) const { return distance(h_->id(u), h_->id(v)); }

Bucket bucket_for_ratio(double ratio) {
  constexpr double kSlack = 1e-12;
  if (ratio <= 0.25 + kSlack) return Bucket::kQuarter;
  if (ratio <= 0.5 + kSlack) return Bucket::kHalf;
  if (ratio <= 0.75 + kSlack) return Bucket::kThreeQuarters;
  return Bucket::kFull;
}

double BucketHistogram::fraction(Bucket b) const {
  const int n = total();
  return n == 0 ? 0.0 : static_cast<double>(counts[static_cast<size_t>(b)]) / n;
}

nlohmann::json BucketHistogram::to_json() const {
  nlohmann::json out = nlohmann::json::object();
  for (size_t i = 0; i < kBucketLabels.size(); ++i) out[kBucketLabels[i]] = fraction(static_cast<Bucket>(i));
  return out;
}

Metrics::Metrics(const Relation& reference, const std::vector<std::string>& attributes)
    : hierarchies_(reference.hierarchies_ptr()) {
  for (const auto& a : attributes) {
    const Hierarchy& h = reference.hierarchies().at(a);
    Distribution dist;
    dist.attribute = a;
    // An attribute the reference does not carry gets all-zero penalties.
    if (reference.schema().find(a)) dist = Distribution::from_relation(reference, a);
    tables_.emplace(a, PenaltyTable(h, dist));
  }
}

Metrics::Metrics(const Relation& reference) : Metrics(reference, reference.schema().attributes) {}

const PenaltyTable& Metrics::table(std::string_view attribute) const {
  auto it = tables_.find(attribute);
  if (it == tables_.end()) {
    throw Error(ErrorCode::kUnknownAttribute, "no penalty table for '" + std::string(attribute) + "'");
  }
  return it->second;
}

double Metrics::tuple_distance(const Relation& a, size_t row_a, const Relation& b, size_t row_b) const {
  if (!(a.schema() == b.schema())) throw Error(ErrorCode::kSchemaMismatch, "relations have different schemas");
  double sum = 0.0;
  for (size_t c = 0; c < a.width(); ++c) sum += table(a.schema().attributes[c]).distance(a.at(row_a, c), b.at(row_b, c));
  return sum;
}

double Metrics::relation_distance(const Relation& a, const Relation& b) const {
  if (!(a.schema() == b.schema())) throw Error(ErrorCode::kSchemaMismatch, "relations have different schemas");
  if (a.size() != b.size()) throw Error(ErrorCode::kAlignmentMismatch, "relations differ in size");
  double sum = 0.0;
  for (size_t r = 0; r < a.size(); ++r) {
    auto other = b.find(a.id(r));
    if (!other) throw Error(ErrorCode::kAlignmentMismatch, "tuple '" + a.id(r) + "' missing from the other relation");
    sum += tuple_distance(a, r, b, *other);
  }
  return sum;
}

double Metrics::normalized(std::string_view attribute, std::string_view truth, std::string_view repair) const {
  const PenaltyTable& t = table(attribute);
  const double full = t.distance(truth, t.hierarchy().root());
  const double d = t.distance(truth, repair);
  if (full <= 0.0) return d <= 0.0 ? 0.0 : 1.0;
  return std::min(1.0, d / full);
}

}  // namespace pacas
