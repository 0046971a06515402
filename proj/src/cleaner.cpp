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
#include "pacas/cleaner.hpp"

#include <algorithm>
#include <set>

#include <spdlog/spdlog.h>

#include "pacas/error.hpp"

namespace pacas {

int CleanOptions::cap(const std::string& attribute) const {
  auto it = lmax_by_attribute.find(attribute);
  return it == lmax_by_attribute.end() ? lmax : it->second;
}

nlohmann::json CleanReport::to_json() const {
  nlohmann::json its = nlohmann::json::array();
  for (const auto& it : iterations) {
    nlohmann::json j = {{"eq", it.eq_id},
                        {"errors", it.error_count},
                        {"allocation", price_to_json(it.allocation)},
                        {"outcome", it.outcome}};
    if (it.purchase) {
      const Purchase& p = *it.purchase;
      j["purchase"] = {{"tuple_id", p.cell.tuple_id},
                       {"attr", p.cell.attribute},
                       {"level", p.level},
                       {"price", price_to_json(p.price)},
                       {"value", p.value}};
    }
    its.push_back(std::move(j));
  }
  return {{"budget", price_to_json(budget)},
          {"spent", price_to_json(spent)},
          {"classes", classes},
          {"initial_violations", initial_violations},
          {"final_violations", final_violations},
          {"quotes", quotes},
          {"iterations", its}};
}

namespace {

bool resolved(const Relation& r, const EquivalenceClass& eq) {
  const std::string& first = r.cell(eq.cells.front().tuple_id, eq.cells.front().attribute);
  return std::all_of(eq.cells.begin(), eq.cells.end(),
                     [&](const Cell& c) { return r.cell(c.tuple_id, c.attribute) == first; });
}

}  // namespace

RepairSession::RepairSession(Relation dirty, std::vector<FD> fds, CleanOptions options, ProviderEndpoint& provider)
    : relation_(std::move(dirty)), fds_(std::move(fds)), options_(std::move(options)), provider_(provider) {
  if (options_.budget < Money()) throw Error(ErrorCode::kInvalidArgument, "budget must be non-negative");
  remaining_ = options_.budget;
  report_.budget = options_.budget;
  const auto violations = find_violations(relation_, fds_);
  report_.initial_violations = violating_pair_count(violations);
  for (auto& eq : generate_eqs(relation_, fds_)) {
    if (!resolved(relation_, eq)) eqs_.push_back(std::move(eq));
  }
  report_.classes = eqs_.size();
  refresh_counts();
  report_.final_violations = report_.initial_violations;
}

void RepairSession::refresh_counts() {
  const auto violations = find_violations(relation_, fds_);
  for (auto& eq : eqs_) eq.error_count = error_count(relation_, fds_, violations, eq);
}

const EquivalenceClass& RepairSession::select_eq() const {
  if (eqs_.empty()) throw Error(ErrorCode::kNoClasses, "no equivalence classes left");
  const EquivalenceClass* best = &eqs_.front();
  for (const auto& eq : eqs_) {
    if (eq.error_count > best->error_count || (eq.error_count == best->error_count && eq.id < best->id)) best = &eq;
  }
  return *best;
}

Money RepairSession::allocate(const EquivalenceClass& eq) const {
  std::int64_t total = 0;
  for (const auto& e : eqs_) total += e.error_count;
  if (total == 0) return remaining_;
  return remaining_.scaled(eq.error_count, total);
}

ValueRequest RepairSession::request_for(const Cell& cell, int level) const {
  return {cell.tuple_id, cell.attribute, level};
}

std::optional<Candidate> RepairSession::generate_request(const EquivalenceClass& eq, Money b) {
  std::optional<Candidate> best;
  for (size_t i = 0; i < eq.cells.size(); ++i) {
    const Cell& cell = eq.cells[i];
    const size_t column = relation_.schema().index(cell.attribute);
    const int cap = std::min(options_.cap(cell.attribute), relation_.hierarchy(column).height());
    const ClientTuple tuple = client_tuple(relation_, relation_.row_of(cell.tuple_id));
    // Later cells can only win with a strictly lower level.
    const int limit = best ? std::min(cap, best->level) : cap;
    for (int l = 0; l <= limit; ++l) {
      Price p;
      try {
        ++report_.quotes;
        p = provider_.ask_price(request_for(cell, l), tuple);
      } catch (const Error& e) {
        spdlog::debug("quote for {}[{}]@{} failed: {}", cell.tuple_id, cell.attribute, l, e.what());
        break;
      }
      if (!p || *p > b) continue;
      if (!best || l < best->level || (l == best->level && *p < best->price)) best = Candidate{i, l, *p};
      break;
    }
  }
  return best;
}

void RepairSession::apply_repair(int eq_id, const std::string& u, int level) {
  auto it = std::find_if(eqs_.begin(), eqs_.end(), [&](const EquivalenceClass& e) { return e.id == eq_id; });
  if (it == eqs_.end()) throw Error(ErrorCode::kStaleClass, "class " + std::to_string(eq_id) + " is not live");
  for (const auto& cell : it->cells) {
    const size_t column = relation_.schema().index(cell.attribute);
    const int cap = options_.cap(cell.attribute);
    const int actual = relation_.hierarchy(column).level(u);
    if (level > cap || actual > cap) {
      throw Error(ErrorCode::kLevelCapViolation,
                  "'" + u + "' sits at level " + std::to_string(actual) + ", cap for " + cell.attribute + " is " +
                      std::to_string(cap));
    }
  }
  for (const auto& cell : it->cells) {
    relation_.set(relation_.row_of(cell.tuple_id), relation_.schema().index(cell.attribute), u);
  }
  drop(eq_id);
}

void RepairSession::drop(int eq_id) {
  std::erase_if(eqs_, [&](const EquivalenceClass& e) { return e.id == eq_id; });
  refresh_counts();
}

std::optional<Purchase> RepairSession::purchase(const EquivalenceClass& eq, const Candidate& c, Money b,
                                                std::string& outcome) {
  // The chosen cell's host tuple first, then the others in class order.
  std::vector<size_t> order{c.cell};
  for (size_t i = 0; i < eq.cells.size(); ++i) {
    if (i != c.cell) order.push_back(i);
  }
  for (size_t i : order) {
    const Cell& cell = eq.cells[i];
    const ValueRequest r = request_for(cell, c.level);
    const ClientTuple tuple = client_tuple(relation_, relation_.row_of(cell.tuple_id));
    try {
      ++report_.quotes;
      const Price p = provider_.ask_price(r, tuple);
      if (!p || *p > b || *p > remaining_) {
        outcome = "unaffordable";
        continue;
      }
      const Disclosure d = provider_.pay(*p, r, tuple);
      return Purchase{cell, d.level, *p, d.value};
    } catch (const Error& e) {
      outcome = std::string(error_code_name(e.code()));
      spdlog::debug("purchase for {}[{}]@{} failed: {}", cell.tuple_id, cell.attribute, c.level, e.what());
      if (e.code() != ErrorCode::kNoMatch) return std::nullopt;
    }
  }
  return std::nullopt;
}

bool RepairSession::step() {
  if (remaining_ <= Money() || eqs_.empty()) return false;
  const EquivalenceClass eq = select_eq();
  IterationRecord rec;
  rec.eq_id = eq.id;
  rec.error_count = eq.error_count;
  rec.allocation = allocate(eq);
  rec.outcome = "unaffordable";
  if (auto candidate = generate_request(eq, rec.allocation)) {
    rec.purchase = purchase(eq, *candidate, rec.allocation, rec.outcome);
  }
  if (rec.purchase) {
    remaining_ -= rec.purchase->price;
    report_.spent += rec.purchase->price;
    rec.outcome = "repaired";
    apply_repair(eq.id, rec.purchase->value, rec.purchase->level);
    spdlog::debug("class {} <- {} (level {}, price {})", eq.id, rec.purchase->value, rec.purchase->level,
                  rec.purchase->price.str());
  } else {
    drop(eq.id);
  }
  report_.iterations.push_back(std::move(rec));
  return true;
}

void RepairSession::run() {
  while (step()) {
  }
  report_.final_violations = violating_pair_count(find_violations(relation_, fds_));
}

CleanResult safe_clean(Relation dirty, ProviderEndpoint& provider, const std::vector<FD>& fds,
                       const CleanOptions& options) {
  if (fds.empty()) throw Error(ErrorCode::kInvalidArgument, "no functional dependencies to enforce");
  RepairSession session(std::move(dirty), fds, options, provider);
  session.run();
  return {session.relation(), session.report()};
}

nlohmann::json RepairQuality::to_json() const {
  return {{"repair_error", repair_error}, {"dirty_error", dirty_error}, {"buckets", buckets.to_json()},
          {"purchases", buckets.total()}};
}

RepairQuality evaluate_repair(const Relation& dirty, const Relation& repaired, const Relation& truth,
                              const CleanReport& report, const Metrics& metrics) {
  RepairQuality q;
  q.repair_error = metrics.relation_distance(repaired, truth);
  q.dirty_error = metrics.relation_distance(dirty, truth);
  for (const auto& it : report.iterations) {
    if (!it.purchase) continue;
    const Purchase& p = *it.purchase;
    q.buckets.add(metrics.bucket(p.cell.attribute, truth.cell(p.cell.tuple_id, p.cell.attribute), p.value));
  }
  return q;
}

}  // namespace pacas
