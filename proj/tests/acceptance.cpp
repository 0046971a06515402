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
// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include "pacas/cleaner.hpp"
#include "pacas/error.hpp"
#include "pacas/harness.hpp"
#include "pacas/metrics.hpp"
#include "pacas/net.hpp"
#include "support/testkit.hpp"

using namespace pacas;

namespace {

// Tolerances and limits.
constexpr double kEntropyTol = 0.005;
constexpr double kDistanceTol = 0.01;
constexpr double kGoldenSeconds = 1.0;
constexpr double kSweepSeconds = 300.0;
constexpr double kLowBucketShare = 0.80;
constexpr int kAnonymityCorpus = 200;
constexpr int kPricingSessions = 100;
constexpr int kConsistencyInstances = 500;

const std::vector<FD> kPhi = {FD{{"GEN", "DIAG"}, {"MED"}}};

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail = what;
    pass = false;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

CleanResult golden_clean(int k, int lmax) {
  const auto master = testkit::golden_master();
  const Constraints c = testkit::golden_constraints();
  ProviderSession s(master, testkit::golden_support(master), {{"GEN"}, {"MED"}, {0}, k}, c.mds);
  EmbeddedProvider p(s);
  CleanOptions o;
  o.budget = Money::units(10);
  o.lmax = lmax;
  return safe_clean(testkit::golden_client(), p, c.fds, o);
}

Outcome golden_repair() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  const CleanResult ground = golden_clean(1, 0);
  const CleanResult general = golden_clean(3, 1);
  const double took = seconds_since(t0);
  for (const char* id : {"t2", "t3"}) {
    out.require(ground.repaired.cell(id, "MED") == "ibuprofen",
                fmt::format("k=1: {}[MED] = {}", id, ground.repaired.cell(id, "MED")));
  }
  for (const char* id : {"t1", "t2", "t3"}) {
    out.require(general.repaired.cell(id, "MED") == "NSAID",
                fmt::format("k=3: {}[MED] = {}", id, general.repaired.cell(id, "MED")));
  }
  out.require(took < kGoldenSeconds, fmt::format("took {:.3f}s", took));
  if (out.pass) out.detail = fmt::format("{:.4f}s", took);
  return out;
}

Outcome metrics_exactness() {
  Outcome out;
  const Metrics m(*testkit::golden_master());
  const double e = m.penalty("AGE", "[31,60]");
  const double d = m.distance("AGE", "45", "51");
  out.require(std::abs(e - 0.79) <= kEntropyTol, fmt::format("E([31,60]) = {:.6f}", e));
  out.require(std::abs(d - 1.58) <= kDistanceTol, fmt::format("delta(45,51) = {:.6f}", d));
  if (out.pass) out.detail = fmt::format("E={:.4f} delta={:.4f}", e, d);
  return out;
}

// Shared corpus for the anonymity criteria.
struct AnonCase {
  Relation r;
  int k;
};

std::vector<AnonCase> anonymity_corpus(const testkit::RandomWorld& world) {
  std::mt19937_64 rng(2024);
  std::vector<AnonCase> out;
  for (int i = 0; i < kAnonymityCorpus; ++i) {
    Relation r = world.relation(rng, 8, 0.0);
    out.push_back({std::move(r), 1 + static_cast<int>(rng() % 4)});
  }
  return out;
}

Outcome anonymity_oracles(const std::vector<AnonCase>& corpus) {
  Outcome out;
  int disagreements = 0;
  int checks = 0;
  for (const auto& c : corpus) {
    for (int l = 0; l <= 2; ++l) {
      const AnonymitySpec spec{{"A"}, {"B", "C"}, {l, 2 - l}, c.k};
      ++checks;
      disagreements +=
          is_xyl_anonymous(c.r, spec) != testkit::oracle::xyl_anonymous(c.r, spec.x, spec.y, spec.levels, c.k);
    }
    ++checks;
    disagreements += is_xy_anonymous(c.r, {"A", "D"}, {"B"}, c.k) !=
                     testkit::oracle::xy_anonymous(c.r, {"A", "D"}, {"B"}, c.k);
  }
  out.require(disagreements == 0, fmt::format("{} disagreements", disagreements));
  if (out.pass) out.detail = fmt::format("{} checks", checks);
  return out;
}

Outcome level_monotonicity(const std::vector<AnonCase>& corpus) {
  Outcome out;
  int counterexamples = 0;
  for (const auto& c : corpus) {
    for (int high = 0; high <= 2; ++high) {
      if (!is_xyl_anonymous(c.r, {{"A"}, {"B"}, {high}, c.k})) continue;
      for (int low = 0; low <= high; ++low) counterexamples += !is_xyl_anonymous(c.r, {{"A"}, {"B"}, {low}, c.k});
      counterexamples += !is_xy_anonymous(c.r, {"A"}, {"B"}, c.k);
    }
  }
  out.require(counterexamples == 0, fmt::format("{} counterexamples", counterexamples));
  if (out.pass) out.detail = fmt::format("{} relations", corpus.size());
  return out;
}

struct FuzzTotals {
  int sales = 0;
  int positive_sales = 0;
  int unsafe_replays = 0;
  int nonzero_requotes = 0;
  int non_shrinking = 0;
};

// Random requests against seeded sessions; each paid sale is then replayed
// from the initial support set through is_safe_query.
FuzzTotals pricing_fuzz() {
  FuzzTotals totals;
  for (int s = 0; s < kPricingSessions; ++s) {
    const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(s);
    std::mt19937_64 rng(seed);
    SyntheticConfig cfg;
    cfg.master_tuples = 30;
    cfg.client_tuples = 20;
    cfg.seed = seed;
    const Dataset d = generate_dataset(cfg);
    const AnonymitySpec spec{d.constraints.qi, d.constraints.sensitive, {static_cast<int>(rng() % 3)},
                             1 + static_cast<int>(rng() % 3)};
    const SupportSet initial = SupportSet::build(d.master, 8, seed);
    ProviderSession session(d.master, initial, spec, d.constraints.mds);
    for (int q = 0; q < 25; ++q) {
      const size_t row = rng() % d.truth.size();
      const ValueRequest r{d.truth.id(row), "MED", static_cast<int>(rng() % 3)};
      const ClientTuple t = client_tuple(d.truth, row);
      const Price p = session.ask_price(r, t);
      if (!p) continue;
      const size_t before = session.support().size();
      try {
        session.pay(*p, r, t);
      } catch (const Error&) {
        continue;
      }
      ++totals.sales;
      if (*p > Money()) {
        ++totals.positive_sales;
        totals.non_shrinking += session.support().size() >= before;
      }
      totals.nonzero_requotes += session.ask_price(r, t) != Money();
    }
    SupportSet replay = initial;
    for (const auto& g : session.sold()) {
      std::vector<Relation> survivors;
      for (size_t i = 0; i < replay.size(); ++i) survivors.push_back(replay.materialize(i));
      std::vector<const Relation*> ptrs;
      for (const auto& r : survivors) ptrs.push_back(&r);
      totals.unsafe_replays += !is_safe_query(g, *d.master, ptrs, spec);
      commit_sale(replay, safe_price(g, *d.master, replay, spec).partition);
    }
  }
  return totals;
}

Outcome pricing_safety(const FuzzTotals& t) {
  Outcome out;
  out.require(t.sales > 0, "no sale happened");
  out.require(t.unsafe_replays == 0, fmt::format("{} sales fail the replay", t.unsafe_replays));
  if (out.pass) out.detail = fmt::format("{} sessions, {} sales replayed", kPricingSessions, t.sales);
  return out;
}

Outcome history_awareness(const FuzzTotals& t) {
  Outcome out;
  out.require(t.positive_sales > 0, "no positive-price sale happened");
  out.require(t.nonzero_requotes == 0, fmt::format("{} re-quotes above 0", t.nonzero_requotes));
  out.require(t.non_shrinking == 0, fmt::format("{} positive sales left the support set as large", t.non_shrinking));
  if (out.pass) out.detail = fmt::format("{} sales, {} positive", t.sales, t.positive_sales);
  return out;
}

Outcome consistency_checker() {
  Outcome out;
  const auto world = testkit::RandomWorld::make();
  const std::vector<FD> fds = {FD{{"A"}, {"B"}}, FD{{"B", "C"}, {"D"}}};
  std::mt19937_64 rng(77);
  int ground_miss = 0;
  int general_miss = 0;
  for (int i = 0; i < kConsistencyInstances; ++i) {
    const Relation ground = world.relation(rng, 8, 0.0);
    ground_miss += is_consistent(ground, fds) != testkit::oracle::classical_consistent(ground, fds);
    const Relation general = world.relation(rng, 8, 0.3);
    general_miss += is_consistent(general, fds) != testkit::oracle::generalized_consistent(general, fds);
  }
  out.require(ground_miss == 0, fmt::format("{} ground disagreements", ground_miss));
  out.require(general_miss == 0, fmt::format("{} generalized disagreements", general_miss));

  const Relation client = testkit::golden_client();
  Relation pair(client.schema(), client.hierarchies_ptr());
  for (size_t i = 0; i < 2; ++i) pair.add(client.id(i), client.row(i));
  const size_t med = pair.schema().index("MED");
  const bool v1 = is_consistent(pair, kPhi);
  pair.set(1, med, "NSAID");
  const bool v2 = is_consistent(pair, kPhi);
  pair.set(1, med, "vasodilators");
  const bool v3 = is_consistent(pair, kPhi);
  out.require(!v1 && v2 && !v3, fmt::format("worked verdicts {}/{}/{}", v1, v2, v3));
  if (out.pass) out.detail = fmt::format("{} ground + {} generalized instances", kConsistencyInstances,
                                         kConsistencyInstances);
  return out;
}

Outcome classes_and_selection() {
  Outcome out;
  const Relation client = testkit::golden_client();
  const auto eqs = generate_eqs(client, kPhi);
  auto ids = [&](const EquivalenceClass& eq) {
    std::vector<std::string> v;
    for (const auto& c : eq.cells) v.push_back(c.tuple_id + "." + c.attribute);
    return fmt::format("{}", fmt::join(v, ","));
  };
  const std::vector<std::string> expected = {"t1.MED,t2.MED,t3.MED", "t4.MED,t5.MED", "t6.MED", "t7.MED", "t8.MED"};
  out.require(eqs.size() == expected.size(), fmt::format("{} classes", eqs.size()));
  for (size_t i = 0; i < std::min(eqs.size(), expected.size()); ++i) {
    out.require(ids(eqs[i]) == expected[i], fmt::format("class {} = {}", i + 1, ids(eqs[i])));
  }
  if (eqs.size() >= 2) {
    out.require(error_count(client, kPhi, eqs[0]) == 3 && error_count(client, kPhi, eqs[1]) == 1,
                "error counts differ from 3 and 1");
  }
  const auto master = testkit::golden_master();
  ProviderSession s(master, testkit::golden_support(master), {{"GEN"}, {"MED"}, {0}, 1},
                    testkit::golden_constraints().mds);
  EmbeddedProvider p(s);
  CleanOptions o;
  o.budget = Money::units(1);
  RepairSession rs(client, kPhi, o, p);
  out.require(rs.select_eq().id == 1, fmt::format("selected class {}", rs.select_eq().id));
  if (out.pass) out.detail = "5 classes, counts 3/1, class 1 selected";
  return out;
}

template <class T>
bool weakly_monotone(const std::vector<T>& v, bool increasing) {
  for (size_t i = 1; i < v.size(); ++i) {
    if (increasing ? v[i] < v[i - 1] : v[i] > v[i - 1]) return false;
  }
  return true;
}

Outcome trends() {
  Outcome out;
  SweepConfig cfg;
  const auto t0 = std::chrono::steady_clock::now();
  const SweepReport report = run_sweep(cfg);
  const double took = seconds_since(t0);
  auto series = [&](const std::string& axis) {
    std::vector<double> v;
    for (const auto& r : report.axis(axis)) v.push_back(r.repair_error);
    return v;
  };
  const auto budget = series("budget");
  const auto k = series("k");
  const auto error = series("error");
  out.require(weakly_monotone(budget, false), fmt::format("budget: {:.3f}", fmt::join(budget, " ")));
  out.require(weakly_monotone(k, true), fmt::format("k: {:.3f}", fmt::join(k, " ")));
  out.require(weakly_monotone(error, true), fmt::format("error: {:.3f}", fmt::join(error, " ")));
  const SweepRow high = report.axis("budget").back();
  const int total = high.buckets[0] + high.buckets[1] + high.buckets[2] + high.buckets[3];
  const double share = total == 0 ? 0.0 : static_cast<double>(high.buckets[0]) / total;
  out.require(share >= kLowBucketShare, fmt::format("lowest bucket holds {:.2f} at budget {}", share, high.value));
  out.require(took <= kSweepSeconds, fmt::format("sweep took {:.1f}s", took));
  if (out.pass) out.detail = fmt::format("sweep {:.2f}s, low bucket {:.2f}", took, share);
  return out;
}

struct Transcript {
  std::string repaired;
  std::string report;
  std::string ledger;
};

std::string ledger_text(const std::vector<LedgerEntry>& ledger) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : ledger) {
    j.push_back({{"request", e.request.to_json()},
                 {"fingerprint", e.fingerprint},
                 {"quote", price_to_json(e.quote)},
                 {"paid", e.paid},
                 {"value", e.value ? nlohmann::json(*e.value) : nlohmann::json()}});
  }
  return j.dump();
}

Transcript transport_run(const Dataset& d, std::uint64_t seed, bool socket) {
  const AnonymitySpec spec{d.constraints.qi, d.constraints.sensitive, {1}, 2};
  const SupportSet support = SupportSet::build(d.master, 10, seed);
  const Injection inj = inject_errors(d.truth, d.constraints.fds, {0.1, 0.5, {}, seed});
  CleanOptions o;
  o.lmax = 3;
  ProviderSession* live = nullptr;
  std::unique_ptr<ProviderSession> owned;
  auto make = [&] {
    auto s = std::make_unique<ProviderSession>(d.master, support, spec, d.constraints.mds);
    live = s.get();
    return s;
  };
  if (socket) {
    Server server(make, "127.0.0.1", 0);
    server.start();
    auto remote = RemoteProvider::connect("127.0.0.1", server.port());
    o.budget = Money::from_double(0.8 * remote->support_weight().to_double());
    const CleanResult result = safe_clean(inj.dirty, *remote, d.constraints.fds, o);
    Transcript t{result.repaired.to_csv(), result.report.to_json().dump(), ledger_text(live->ledger())};
    remote.reset();
    server.stop();
    return t;
  }
  owned = make();
  EmbeddedProvider p(*owned);
  o.budget = Money::from_double(0.8 * p.support_weight().to_double());
  const CleanResult result = safe_clean(inj.dirty, p, d.constraints.fds, o);
  return {result.repaired.to_csv(), result.report.to_json().dump(), ledger_text(owned->ledger())};
}

Outcome transport_equivalence() {
  Outcome out;
  int compared = 0;
  for (std::uint64_t seed : {5u, 6u, 7u}) {
    SyntheticConfig cfg;
    cfg.master_tuples = 80;
    cfg.client_tuples = 60;
    cfg.seed = seed;
    const Dataset d = generate_dataset(cfg);
    const Transcript a = transport_run(d, seed, false);
    const Transcript b = transport_run(d, seed, false);
    const Transcript c = transport_run(d, seed, true);
    out.require(a.repaired == b.repaired && a.report == b.report && a.ledger == b.ledger,
                fmt::format("seed {}: embedded reruns differ", seed));
    out.require(a.repaired == c.repaired, fmt::format("seed {}: repaired relations differ", seed));
    out.require(a.report == c.report, fmt::format("seed {}: reports differ", seed));
    out.require(a.ledger == c.ledger, fmt::format("seed {}: ledgers differ", seed));
    ++compared;
  }
  if (out.pass) out.detail = fmt::format("{} seeds", compared);
  return out;
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  const auto world = testkit::RandomWorld::make();
  const auto corpus = anonymity_corpus(world);
  std::optional<FuzzTotals> fuzz;
  auto fuzzed = [&]() -> const FuzzTotals& {
    if (!fuzz) fuzz = pricing_fuzz();
    return *fuzz;
  };
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"golden repair", golden_repair},
      {"metrics exactness", metrics_exactness},
      {"anonymity oracle equivalence", [&] { return anonymity_oracles(corpus); }},
      {"level monotonicity", [&] { return level_monotonicity(corpus); }},
      {"pricing safety", [&] { return pricing_safety(fuzzed()); }},
      {"history awareness", [&] { return history_awareness(fuzzed()); }},
      {"consistency checker", consistency_checker},
      {"equivalence classes and selection", classes_and_selection},
      {"trend checks", trends},
      {"determinism and transport equivalence", transport_equivalence},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("criterion %zu %s: %s (%s)\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
