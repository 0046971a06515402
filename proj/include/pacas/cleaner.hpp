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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pacas/metrics.hpp"
#include "pacas/money.hpp"
#include "pacas/provider.hpp"
#include "pacas/relation.hpp"

namespace pacas {

struct CleanOptions {
  Money budget;
  int lmax = 0;  // applies to attributes without their own entry
  std::map<std::string, int> lmax_by_attribute;

  int cap(const std::string& attribute) const;
};

// A request the client can afford: cell index within its class, level and the
// quoted price.
struct Candidate {
  size_t cell = 0;
  int level = 0;
  Money price;
};

struct Purchase {
  Cell cell;  // the cell whose host tuple was sent
  int level = 0;
  Money price;
  std::string value;
};

struct IterationRecord {
  int eq_id = 0;
  int error_count = 0;
  Money allocation;
  std::string outcome;  // "repaired", "unaffordable" or a provider error code
  std::optional<Purchase> purchase;
};

struct CleanReport {
  Money budget;
  Money spent;
  size_t classes = 0;  // unresolved classes at the start
  size_t initial_violations = 0;
  size_t final_violations = 0;
  int quotes = 0;
  std::vector<IterationRecord> iterations;

  nlohmann::json to_json() const;
};

// Client-side repair state for one run. The provider is consulted through an
// endpoint, so the same loop drives an in-process or a remote provider.
class RepairSession {
 public:
  RepairSession(Relation dirty, std::vector<FD> fds, CleanOptions options, ProviderEndpoint& provider);

  const Relation& relation() const { return relation_; }
  const std::vector<EquivalenceClass>& classes() const { return eqs_; }
  Money remaining() const { return remaining_; }
  const CleanReport& report() const { return report_; }

  // Largest error count, lowest id on ties. Throws kNoClasses.
  const EquivalenceClass& select_eq() const;
  // Share of the remaining budget proportional to the class's error count
  // among the live classes; the whole budget when no live class has errors.
  Money allocate(const EquivalenceClass& eq) const;
  // Per cell, the lowest level up to the cap with a finite quote within b;
  // then the lowest such level overall, cheaper first, earlier cell on ties.
  std::optional<Candidate> generate_request(const EquivalenceClass& eq, Money b);
  // Writes u into every cell of the class, drops it and refreshes counts.
  // Throws kLevelCapViolation.
  void apply_repair(int eq_id, const std::string& u, int level);

  // One loop iteration; false once the budget or the classes run out.
  bool step();
  void run();

 private:
  ValueRequest request_for(const Cell& cell, int level) const;
  void drop(int eq_id);
  void refresh_counts();
  std::optional<Purchase> purchase(const EquivalenceClass& eq, const Candidate& c, Money b, std::string& outcome);

  Relation relation_;
  std::vector<FD> fds_;
  CleanOptions options_;
  ProviderEndpoint& provider_;
  std::vector<EquivalenceClass> eqs_;
  Money remaining_;
  CleanReport report_;
};

struct CleanResult {
  Relation repaired;
  CleanReport report;
};

CleanResult safe_clean(Relation dirty, ProviderEndpoint& provider, const std::vector<FD>& fds,
                       const CleanOptions& options);

// Distance of the repair from the truth, plus the normalized distance of each
// purchased value from the true value of the requested cell.
struct RepairQuality {
  double repair_error = 0.0;
  double dirty_error = 0.0;
  BucketHistogram buckets;

  nlohmann::json to_json() const;
};

RepairQuality evaluate_repair(const Relation& dirty, const Relation& repaired, const Relation& truth,
                              const CleanReport& report, const Metrics& metrics);

}  // namespace pacas
