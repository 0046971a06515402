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
#include "pacas/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "pacas/error.hpp"
#include "pacas/net.hpp"

namespace pacas {

namespace {

// splitmix64 finalizer; derives independent stream seeds from one seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <class Rng>
size_t pick(Rng& rng, size_t n) {
  return std::uniform_int_distribution<size_t>(0, n - 1)(rng);
}

template <class Rng>
std::string different_ground_value(Rng& rng, const Hierarchy& h, const std::string& current) {
  std::vector<std::string> pool;
  for (const auto& v : h.ground_domain()) {
    if (v != current) pool.push_back(v);
  }
  if (pool.empty()) return current;
  return pool[pick(rng, pool.size())];
}

}  // namespace

Injection inject_errors(const Relation& truth, const std::vector<FD>& fds, const InjectionPlan& plan) {
  if (!(plan.rate > 0.0 && plan.rate <= 1.0)) {
    throw Error(ErrorCode::kRateInfeasible, "error rate must lie in (0, 1]");
  }
  if (plan.constraint_share < 0.0 || plan.constraint_share > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "constraint share must lie in [0, 1]");
  }
  const size_t n = truth.size();
  const size_t count = static_cast<size_t>(std::ceil(plan.rate * static_cast<double>(n) - 1e-9));
  if (n == 0 || count == 0 || count > n) {
    throw Error(ErrorCode::kRateInfeasible,
                fmt::format("rate {} selects no tuple of a {}-tuple relation", plan.rate, n));
  }

  std::vector<size_t> random_columns;
  if (plan.attributes.empty()) {
    for (const auto& fd : fds) {
      for (size_t c : truth.schema().indices(fd.lhs)) random_columns.push_back(c);
      for (size_t c : truth.schema().indices(fd.rhs)) random_columns.push_back(c);
    }
  } else {
    random_columns = truth.schema().indices(plan.attributes);
  }
  std::sort(random_columns.begin(), random_columns.end());
  random_columns.erase(std::unique(random_columns.begin(), random_columns.end()), random_columns.end());
  if (random_columns.empty()) throw Error(ErrorCode::kInvalidArgument, "no attributes to corrupt");

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::mt19937_64 perm_rng(mix_seed(plan.seed, 0));
  std::shuffle(order.begin(), order.end(), perm_rng);

  Injection out{truth, {}};
  for (size_t i = 0; i < count; ++i) {
    const size_t row = order[i];
    std::mt19937_64 rng(mix_seed(plan.seed, i + 1));
    const bool constraint = std::bernoulli_distribution(plan.constraint_share)(rng);
    std::optional<size_t> column;
    if (constraint && !fds.empty()) {
      const FD& fd = fds[pick(rng, fds.size())];
      const auto lhs = truth.schema().indices(fd.lhs);
      bool has_partner = false;
      for (size_t other = 0; other < n && !has_partner; ++other) {
        if (other == row) continue;
        has_partner = std::all_of(lhs.begin(), lhs.end(), [&](size_t c) {
          return truth.at(other, c) == truth.at(row, c) && truth.hierarchy(c).is_ground(truth.at(row, c));
        });
      }
      if (has_partner) {
        const auto rhs = truth.schema().indices(fd.rhs);
        column = rhs[pick(rng, rhs.size())];
      }
    }
    const bool induced = column.has_value();
    if (!column) column = random_columns[pick(rng, random_columns.size())];
    const std::string& old_value = truth.at(row, *column);
    std::string new_value = different_ground_value(rng, truth.hierarchy(*column), old_value);
    if (new_value == old_value) continue;
    out.dirty.set(row, *column, new_value);
    out.manifest.push_back({truth.id(row), truth.schema().attributes[*column], old_value, std::move(new_value),
                            induced ? "constraint" : "random"});
  }
  return out;
}

Relation apply_manifest(const Relation& truth, const std::vector<InjectedError>& manifest) {
  Relation out = truth;
  for (const auto& e : manifest) {
    const size_t row = out.row_of(e.tuple_id);
    const size_t c = out.schema().index(e.attribute);
    if (out.at(row, c) != e.old_value) {
      throw Error(ErrorCode::kInvalidArgument, "manifest does not match " + e.tuple_id + "[" + e.attribute + "]");
    }
    out.set(row, c, e.new_value);
  }
  return out;
}

nlohmann::json manifest_to_json(const std::vector<InjectedError>& manifest) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : manifest) {
    out.push_back({{"tuple_id", e.tuple_id}, {"attr", e.attribute}, {"old", e.old_value}, {"new", e.new_value},
                   {"kind", e.kind}});
  }
  return out;
}

std::vector<InjectedError> manifest_from_json(const nlohmann::json& j) {
  std::vector<InjectedError> out;
  try {
    for (const auto& e : j) {
      out.push_back({e.at("tuple_id").get<std::string>(), e.at("attr").get<std::string>(),
                     e.at("old").get<std::string>(), e.at("new").get<std::string>(), e.value("kind", "random")});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, std::string("bad manifest: ") + e.what());
  }
  return out;
}

Hierarchy balanced_hierarchy(const std::string& attribute, const std::vector<int>& fanout) {
  const int levels = static_cast<int>(fanout.size()) + 1;
  nlohmann::json nodes = nlohmann::json::array();
  nodes.push_back({{"value", "*"}, {"level", levels - 1}, {"parent", nullptr}});
  std::vector<std::string> frontier{""};
  for (size_t depth = 0; depth < fanout.size(); ++depth) {
    std::vector<std::string> next;
    for (const auto& path : frontier) {
      const std::string parent = path.empty() ? "*" : attribute + "-" + path;
      for (int i = 0; i < fanout[depth]; ++i) {
        const std::string child = path.empty() ? std::to_string(i) : path + "." + std::to_string(i);
        nodes.push_back({{"value", attribute + "-" + child},
                         {"level", levels - 2 - static_cast<int>(depth)},
                         {"parent", parent}});
        next.push_back(child);
      }
    }
    frontier = std::move(next);
  }
  return Hierarchy::from_json({{"attribute", attribute}, {"levels", levels}, {"nodes", nodes}});
}

namespace {

Hierarchy gender_hierarchy() {
  return Hierarchy::from_json({{"attribute", "GEN"},
                               {"levels", 2},
                               {"nodes",
                                {{{"value", "*"}, {"level", 1}, {"parent", nullptr}},
                                 {{"value", "female"}, {"level", 0}, {"parent", "*"}},
                                 {{"value", "male"}, {"level", 0}, {"parent", "*"}}}}});
}

Hierarchy age_hierarchy() {
  nlohmann::json nodes = nlohmann::json::array();
  nodes.push_back({{"value", "*"}, {"level", 2}, {"parent", nullptr}});
  for (int lo : {18, 41, 66}) {
    const int hi = lo == 18 ? 40 : lo == 41 ? 65 : 90;
    const std::string band = fmt::format("[{},{}]", lo, hi);
    nodes.push_back({{"value", band}, {"level", 1}, {"parent", "*"}});
    for (int age = lo + 2; age <= hi; age += 6) {
      nodes.push_back({{"value", std::to_string(age)}, {"level", 0}, {"parent", band}});
    }
  }
  return Hierarchy::from_json({{"attribute", "AGE"}, {"levels", 3}, {"nodes", nodes}});
}

}  // namespace

Dataset generate_dataset(const SyntheticConfig& config) {
  if (config.master_tuples == 0 || config.client_tuples == 0) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic relations need at least one tuple");
  }
  auto set = std::make_shared<HierarchySet>();
  set->add(gender_hierarchy());
  set->add(age_hierarchy());
  set->add(balanced_hierarchy("ZIP", {2, 4}));
  set->add(balanced_hierarchy(
      "DIAG", {static_cast<int>(config.diagnosis_groups), static_cast<int>(config.diagnoses_per_group)}));
  set->add(balanced_hierarchy("MED", config.med_fanout));
  std::shared_ptr<const HierarchySet> hierarchies = set;

  std::mt19937_64 rng(mix_seed(config.seed, 100));
  const auto genders = hierarchies->at("GEN").ground_domain();
  const auto ages = hierarchies->at("AGE").ground_domain();
  const auto zips = hierarchies->at("ZIP").ground_domain();
  const auto diags = hierarchies->at("DIAG").ground_domain();
  const auto meds = hierarchies->at("MED").ground_domain();

  // The clean world: one medication per (gender, diagnosis).
  std::map<std::pair<std::string, std::string>, std::string> prescribed;
  for (const auto& g : genders) {
    for (const auto& d : diags) prescribed[{g, d}] = meds[pick(rng, meds.size())];
  }

  auto master = std::make_shared<Relation>(Schema{"ID", {"GEN", "AGE", "ZIP", "DIAG", "MED"}}, hierarchies);
  // Cover every (gender, diagnosis) first so each client tuple has a match.
  std::vector<std::pair<std::string, std::string>> combos;
  for (const auto& [key, med] : prescribed) combos.push_back(key);
  for (size_t i = 0; i < config.master_tuples; ++i) {
    const auto [g, d] = i < combos.size() ? combos[i]
                                          : std::pair{genders[pick(rng, genders.size())], diags[pick(rng, diags.size())]};
    master->add(fmt::format("m{}", i + 1),
                {g, ages[pick(rng, ages.size())], zips[pick(rng, zips.size())], d, prescribed.at({g, d})});
  }

  Relation truth(Schema{"ID", {"GEN", "AGE", "DIAG", "MED"}}, hierarchies);
  for (size_t i = 0; i < config.client_tuples; ++i) {
    const std::string& g = genders[pick(rng, genders.size())];
    const std::string& d = diags[pick(rng, diags.size())];
    truth.add(fmt::format("t{}", i + 1), {g, ages[pick(rng, ages.size())], d, prescribed.at({g, d})});
  }

  Constraints constraints;
  constraints.qi = {"GEN"};
  constraints.sensitive = {"MED"};
  constraints.fds = {FD{{"GEN", "DIAG"}, {"MED"}}};
  constraints.mds = {MD{{{"GEN", "GEN", "exact"}, {"DIAG", "DIAG", "exact"}}, "MED", "MED"}};
  return {hierarchies, master, std::move(truth), std::move(constraints)};
}

RunResult run_point(const Dataset& data, const RunParams& params) {
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  result.params = params;

  InjectionPlan plan;
  plan.rate = params.error_rate;
  plan.constraint_share = params.constraint_share;
  plan.seed = mix_seed(params.seed, 1);
  const Injection injection = inject_errors(data.truth, data.constraints.fds, plan);

  SupportSet support = SupportSet::build(data.master, params.support_size, mix_seed(params.seed, 2));
  const Money budget = Money::from_double(params.budget * support.total_weight().to_double());
  AnonymitySpec spec{data.constraints.qi, data.constraints.sensitive,
                     std::vector<int>(data.constraints.sensitive.size(), params.level), params.k};
  ProviderSession session(data.master, std::move(support), spec, data.constraints.mds);
  EmbeddedProvider provider(session);

  CleanOptions options;
  options.budget = budget;
  options.lmax = params.lmax;
  const CleanResult cleaned = safe_clean(injection.dirty, provider, data.constraints.fds, options);

  const Relation& reference = params.truth_reference ? data.truth : *data.master;
  const Metrics metrics(reference, data.truth.schema().attributes);
  const RepairQuality quality = evaluate_repair(injection.dirty, cleaned.repaired, data.truth, cleaned.report, metrics);

  result.repair_error = quality.repair_error;
  result.dirty_error = quality.dirty_error;
  result.initial_violations = cleaned.report.initial_violations;
  result.final_violations = cleaned.report.final_violations;
  result.buckets = quality.buckets;
  result.spent = cleaned.report.spent;
  result.purchases = quality.buckets.total();
  result.quotes = cleaned.report.quotes;
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

SweepConfig SweepConfig::from_json(const nlohmann::json& j) {
  SweepConfig c;
  try {
    if (j.contains("defaults")) {
      const auto& d = j["defaults"];
      c.defaults.budget = d.value("budget", c.defaults.budget);
      c.defaults.support_size = d.value("support_size", c.defaults.support_size);
      c.defaults.level = d.value("level", c.defaults.level);
      c.defaults.k = d.value("k", c.defaults.k);
      c.defaults.error_rate = d.value("error_rate", c.defaults.error_rate);
      c.defaults.lmax = d.value("lmax", c.defaults.lmax);
      c.defaults.constraint_share = d.value("constraint_share", c.defaults.constraint_share);
      c.defaults.seed = d.value("seed", c.defaults.seed);
      c.defaults.truth_reference = d.value("truth_reference", c.defaults.truth_reference);
    }
    c.budgets = j.value("budgets", c.budgets);
    c.support_sizes = j.value("support_sizes", c.support_sizes);
    c.levels = j.value("levels", c.levels);
    c.ks = j.value("ks", c.ks);
    c.error_rates = j.value("error_rates", c.error_rates);
    c.repetitions = j.value("repetitions", c.repetitions);
    c.axes = j.value("axes", c.axes);
    if (j.contains("data")) {
      const auto& d = j["data"];
      c.data.master_tuples = d.value("master_tuples", c.data.master_tuples);
      c.data.client_tuples = d.value("client_tuples", c.data.client_tuples);
      c.data.diagnosis_groups = d.value("diagnosis_groups", c.data.diagnosis_groups);
      c.data.diagnoses_per_group = d.value("diagnoses_per_group", c.data.diagnoses_per_group);
      c.data.med_fanout = d.value("med_fanout", c.data.med_fanout);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, std::string("bad sweep config: ") + e.what());
  }
  if (c.repetitions < 1) throw Error(ErrorCode::kInvalidArgument, "repetitions must be at least 1");
  return c;
}

nlohmann::json SweepConfig::to_json() const {
  return {{"defaults",
           {{"budget", defaults.budget},
            {"support_size", defaults.support_size},
            {"level", defaults.level},
            {"k", defaults.k},
            {"error_rate", defaults.error_rate},
            {"lmax", defaults.lmax},
            {"constraint_share", defaults.constraint_share},
            {"seed", defaults.seed},
            {"truth_reference", defaults.truth_reference}}},
          {"budgets", budgets},
          {"support_sizes", support_sizes},
          {"levels", levels},
          {"ks", ks},
          {"error_rates", error_rates},
          {"repetitions", repetitions},
          {"axes", axes},
          {"data",
           {{"master_tuples", data.master_tuples},
            {"client_tuples", data.client_tuples},
            {"diagnosis_groups", data.diagnosis_groups},
            {"diagnoses_per_group", data.diagnoses_per_group},
            {"med_fanout", data.med_fanout}}}};
}

std::vector<SweepRow> SweepReport::axis(const std::string& name) const {
  std::vector<SweepRow> out;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out), [&](const SweepRow& r) { return r.axis == name; });
  return out;
}

void SweepReport::write(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::map<std::string, std::ofstream> files;
  std::ofstream timings(fs::path(dir) / "timings.csv");
  timings << "axis,value,seconds\n";
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& r : rows) {
    auto [it, fresh] = files.try_emplace(r.axis);
    if (fresh) {
      it->second.open(fs::path(dir) / (r.axis + ".csv"));
      it->second << "value,repair_error,dirty_error,initial_violations,final_violations,spent,purchases,quotes,"
                    "bucket_0_25,bucket_25_50,bucket_50_75,bucket_75_100\n";
    }
    it->second << fmt::format("{},{:.6f},{:.6f},{:.3f},{:.3f},{:.3f},{:.3f},{:.3f},{},{},{},{}\n", r.value,
                              r.repair_error, r.dirty_error, r.initial_violations, r.final_violations, r.spent,
                              r.purchases, r.quotes, r.buckets[0], r.buckets[1], r.buckets[2], r.buckets[3]);
    timings << fmt::format("{},{},{:.4f}\n", r.axis, r.value, r.seconds);
    summary.push_back({{"axis", r.axis},
                       {"value", r.value},
                       {"repair_error", std::round(r.repair_error * 1e6) / 1e6},
                       {"dirty_error", std::round(r.dirty_error * 1e6) / 1e6},
                       {"final_violations", r.final_violations},
                       {"buckets", r.buckets}});
  }
  std::ofstream(fs::path(dir) / "summary.json") << summary.dump(2) << "\n";
}

SweepReport run_sweep(const SweepConfig& config) {
  std::vector<Dataset> datasets;
  for (int rep = 0; rep < config.repetitions; ++rep) {
    SyntheticConfig data = config.data;
    data.seed = config.defaults.seed + static_cast<std::uint64_t>(rep);
    datasets.push_back(generate_dataset(data));
  }

  SweepReport report;
  auto run_axis = [&](const std::string& axis, const std::vector<double>& values, auto&& apply) {
    for (double v : values) {
      SweepRow row;
      row.axis = axis;
      row.value = v;
      for (int rep = 0; rep < config.repetitions; ++rep) {
        RunParams p = config.defaults;
        p.seed = config.defaults.seed + static_cast<std::uint64_t>(rep);
        apply(p, v);
        const RunResult r = run_point(datasets[rep], p);
        row.repair_error += r.repair_error;
        row.dirty_error += r.dirty_error;
        row.initial_violations += static_cast<double>(r.initial_violations);
        row.final_violations += static_cast<double>(r.final_violations);
        row.spent += r.spent.to_double();
        row.purchases += r.purchases;
        row.quotes += r.quotes;
        row.seconds += r.seconds;
        for (size_t b = 0; b < 4; ++b) row.buckets[b] += r.buckets.counts[b];
      }
      const double n = config.repetitions;
      row.repair_error /= n;
      row.dirty_error /= n;
      row.initial_violations /= n;
      row.final_violations /= n;
      row.spent /= n;
      row.purchases /= n;
      row.quotes /= n;
      row.seconds /= n;
      spdlog::info("{}={} repair_error={:.4f}", axis, v, row.repair_error);
      report.rows.push_back(row);
    }
  };
  auto as_doubles = [](const auto& xs) {
    std::vector<double> out;
    for (auto x : xs) out.push_back(static_cast<double>(x));
    return out;
  };

  for (const auto& axis : config.axes) {
    if (axis == "budget") {
      run_axis(axis, config.budgets, [](RunParams& p, double v) { p.budget = v; });
    } else if (axis == "support") {
      run_axis(axis, as_doubles(config.support_sizes),
               [](RunParams& p, double v) { p.support_size = static_cast<size_t>(v); });
    } else if (axis == "level") {
      run_axis(axis, as_doubles(config.levels), [](RunParams& p, double v) { p.level = static_cast<int>(v); });
    } else if (axis == "k") {
      run_axis(axis, as_doubles(config.ks), [](RunParams& p, double v) { p.k = static_cast<int>(v); });
    } else if (axis == "error") {
      run_axis(axis, config.error_rates, [](RunParams& p, double v) { p.error_rate = v; });
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown sweep axis '" + axis + "'");
    }
  }
  return report;
}

}  // namespace pacas
