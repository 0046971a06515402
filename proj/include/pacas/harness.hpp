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

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "pacas/cleaner.hpp"
#include "pacas/hierarchy.hpp"
#include "pacas/metrics.hpp"
#include "pacas/relation.hpp"

namespace pacas {

struct InjectionPlan {
  double rate = 0.1;              // fraction of tuples receiving one error
  double constraint_share = 0.5;  // remainder are random errors
  std::vector<std::string> attributes;  // empty: every FD attribute
  std::uint64_t seed = 1;
};

struct InjectedError {
  std::string tuple_id;
  std::string attribute;
  std::string old_value;
  std::string new_value;
  std::string kind;  // "constraint" or "random"

  friend bool operator==(const InjectedError&, const InjectedError&) = default;
};

struct Injection {
  Relation dirty;
  std::vector<InjectedError> manifest;
};

// At most one error per tuple. Tuples are taken from a seeded permutation and
// each tuple's error depends only on the seed and its position, so a higher
// rate corrupts a superset of the cells a lower rate does.
// Throws kRateInfeasible when the rate selects no tuple or is out of (0, 1].
Injection inject_errors(const Relation& truth, const std::vector<FD>& fds, const InjectionPlan& plan);
Relation apply_manifest(const Relation& truth, const std::vector<InjectedError>& manifest);
nlohmann::json manifest_to_json(const std::vector<InjectedError>& manifest);
std::vector<InjectedError> manifest_from_json(const nlohmann::json& j);

// A generated master relation and a client ground truth over the same
// entities, shaped like the patient/medication example.
struct Dataset {
  std::shared_ptr<const HierarchySet> hierarchies;
  std::shared_ptr<const Relation> master;
  Relation truth;
  Constraints constraints;
};

struct SyntheticConfig {
  size_t master_tuples = 240;
  size_t client_tuples = 200;
  size_t diagnosis_groups = 3;
  size_t diagnoses_per_group = 2;
  // Fan-out per level of the MED hierarchy, root first.
  std::vector<int> med_fanout = {2, 3, 2, 3};
  std::uint64_t seed = 1;
};

// Hierarchy with the given fan-outs from the root down. Node names carry the
// path from the root, e.g. "MED-1.0.2".
Hierarchy balanced_hierarchy(const std::string& attribute, const std::vector<int>& fanout);
Dataset generate_dataset(const SyntheticConfig& config);

// One grid point of an experiment.
struct RunParams {
  double budget = 0.8;  // fraction of the support set's total weight
  size_t support_size = 10;
  int level = 2;  // anonymity level for the sensitive attributes
  int k = 3;
  double error_rate = 0.1;
  int lmax = 3;
  double constraint_share = 0.5;
  std::uint64_t seed = 1;
  bool truth_reference = false;  // penalties over the truth instead of the master
};

struct RunResult {
  RunParams params;
  double repair_error = 0.0;
  double dirty_error = 0.0;
  size_t initial_violations = 0;
  size_t final_violations = 0;
  BucketHistogram buckets;
  Money spent;
  int purchases = 0;
  int quotes = 0;
  double seconds = 0.0;
};

// Injects errors, builds the provider session and runs the clean in process.
RunResult run_point(const Dataset& data, const RunParams& params);

struct SweepConfig {
  RunParams defaults;
  std::vector<double> budgets = {0.2, 0.4, 0.6, 0.8};
  std::vector<size_t> support_sizes = {6, 8, 10, 12, 14};
  std::vector<int> levels = {0, 1, 2, 3, 4};
  std::vector<int> ks = {1, 2, 3, 4, 5};
  std::vector<double> error_rates = {0.05, 0.10, 0.15, 0.20, 0.25};
  int repetitions = 3;
  SyntheticConfig data;
  std::vector<std::string> axes = {"budget", "support", "level", "k", "error"};

  static SweepConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Mean over repetitions at one grid point.
struct SweepRow {
  std::string axis;
  double value = 0.0;
  double repair_error = 0.0;
  double dirty_error = 0.0;
  double initial_violations = 0.0;
  double final_violations = 0.0;
  double spent = 0.0;
  double purchases = 0.0;
  double quotes = 0.0;
  std::array<int, 4> buckets{};
  double seconds = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;

  std::vector<SweepRow> axis(const std::string& name) const;
  // One CSV per axis plus summary.json and timings.csv under dir. Everything
  // except timings.csv is identical across reruns with the same config.
  void write(const std::string& dir) const;
};

// Repetition r uses seed defaults.seed + r for the data, the injection and
// the support set, shared by every grid point.
SweepReport run_sweep(const SweepConfig& config);

}  // namespace pacas
