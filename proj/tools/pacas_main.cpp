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
// pacas: command-line driver for the provider, the cleaner and the harness.

#include <signal.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "pacas/anonymity.hpp"
#include "pacas/cleaner.hpp"
#include "pacas/error.hpp"
#include "pacas/harness.hpp"
#include "pacas/hierarchy.hpp"
#include "pacas/metrics.hpp"
#include "pacas/net.hpp"
#include "pacas/pricing.hpp"
#include "pacas/provider.hpp"
#include "pacas/relation.hpp"

namespace fs = std::filesystem;
using namespace pacas;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitProtocol = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMalformedInput, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path);
  out << text;
}

// FNV-1a, printed in the serve banner so clients can tell datasets apart.
std::string fingerprint(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "2" applies to every attribute; "MED=1,AGE=0" sets attributes one by one.
struct LevelArg {
  std::optional<int> global;
  std::map<std::string, int> by_attribute;

  static LevelArg parse(const std::string& text) {
    LevelArg a;
    for (const auto& part : split(text, ',')) {
      const auto eq = part.find('=');
      try {
        if (eq == std::string::npos) {
          a.global = std::stoi(part);
        } else {
          a.by_attribute[part.substr(0, eq)] = std::stoi(part.substr(eq + 1));
        }
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::kInvalidArgument, "bad level '" + part + "'");
      }
    }
    return a;
  }

  int for_attribute(const std::string& attr, int fallback) const {
    auto it = by_attribute.find(attr);
    if (it != by_attribute.end()) return it->second;
    return global.value_or(fallback);
  }
};

struct Inputs {
  std::vector<std::string> hierarchy_paths;
  std::string config_path;

  std::shared_ptr<const HierarchySet> hierarchies() const { return HierarchySet::load(hierarchy_paths); }
  Constraints constraints() const { return Constraints::load(config_path); }

  void add_to(CLI::App* cmd) {
    cmd->add_option("--hierarchies", hierarchy_paths, "Hierarchy JSON files or directories")->required();
    cmd->add_option("--config", config_path, "Schema, FD and MD config JSON")->required()->check(CLI::ExistingFile);
  }
};

// Everything needed to stand up a provider session in this process.
struct ProviderArgs {
  std::string support_path;
  size_t support_size = 10;
  std::uint64_t seed = 1;
  int k = 3;
  std::string levels = "0";
  std::vector<std::string> x;
  std::vector<std::string> y;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--support", support_path, "Support-set snapshot JSON")->check(CLI::ExistingFile);
    cmd->add_option("--support-size", support_size, "Support-set size when sampling")->capture_default_str();
    cmd->add_option("--seed", seed, "Seed for every random choice")->capture_default_str();
    cmd->add_option("--k", k, "Anonymity threshold")->capture_default_str();
    cmd->add_option("--levels", levels, "Anonymity levels for Y: N or ATTR=N,...")->capture_default_str();
    cmd->add_option("--x", x, "Quasi-identifiers (default: config qi)")->delimiter(',');
    cmd->add_option("--y", y, "Sensitive attributes (default: config sensitive)")->delimiter(',');
  }

  AnonymitySpec spec(const Constraints& c) const {
    AnonymitySpec s;
    s.x = x.empty() ? c.qi : x;
    s.y = y.empty() ? c.sensitive : y;
    const LevelArg parsed = LevelArg::parse(levels);
    for (const auto& attr : s.y) s.levels.push_back(parsed.for_attribute(attr, 0));
    s.k = k;
    return s;
  }

  SupportSet support(const std::shared_ptr<const Relation>& master) const {
    if (!support_path.empty()) return SupportSet::from_json(nlohmann::json::parse(read_file(support_path)), master);
    return SupportSet::build(master, support_size, seed);
  }
};

std::shared_ptr<const Relation> load_master(const std::string& path, const std::shared_ptr<const HierarchySet>& h) {
  return std::make_shared<const Relation>(Relation::load_csv(path, h));
}

std::pair<std::string, std::uint16_t> parse_address(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "expected host:port, got '" + addr + "'");
  int port = 0;
  try {
    port = std::stoi(addr.substr(colon + 1));
  } catch (const std::logic_error&) {
    port = -1;
  }
  if (port <= 0 || port > 65535) throw Error(ErrorCode::kInvalidArgument, "bad port in '" + addr + "'");
  return {addr.substr(0, colon), static_cast<std::uint16_t>(port)};
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("pacas");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("PACAS_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

// ---- serve ----

struct ServeArgs {
  Inputs in;
  ProviderArgs provider;
  std::string master;
  std::string host = "127.0.0.1";
  std::uint16_t port = 7070;
  bool stdio = false;
};

int run_serve(const ServeArgs& a) {
  const auto hierarchies = a.in.hierarchies();
  const Constraints constraints = a.in.constraints();
  const auto master = load_master(a.master, hierarchies);
  const AnonymitySpec spec = a.provider.spec(constraints);
  const SupportSet support = a.provider.support(master);
  // Fail on bad inputs before the banner.
  ProviderSession(master, support, spec, constraints.mds);
  auto factory = [&] { return std::make_unique<ProviderSession>(master, support, spec, constraints.mds); };
  const std::string banner = fmt::format("fingerprint={} tuples={} support={} k={}", fingerprint(master->to_csv()),
                                         master->size(), support.size(), spec.k);

  if (a.stdio) {
    std::cerr << "ready stdio " << banner << std::endl;
    auto session = factory();
    serve_stream(*session, std::cin, std::cout);
    return 0;
  }

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Server server(factory, a.host, a.port);
  server.start();
  std::cout << "ready " << a.host << ":" << server.port() << " " << banner << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  spdlog::info("signal {}, shutting down", sig);
  server.stop();
  return 0;
}

// ---- clean ----

struct CleanArgs {
  Inputs in;
  ProviderArgs provider;
  std::string client;
  std::string master;
  double budget = 0.8;
  std::string budget_amount;
  std::string lmax = "0";
  std::string truth;
  std::string out;
  std::string report;
  bool remote_flags_set = false;
};

int run_clean(const CleanArgs& a) {
  const auto hierarchies = a.in.hierarchies();
  const Constraints constraints = a.in.constraints();
  Relation dirty = Relation::load_csv(a.client, hierarchies);

  std::unique_ptr<ProviderSession> session;
  std::unique_ptr<ProviderEndpoint> endpoint;
  if (fs::is_regular_file(a.master)) {
    auto master = load_master(a.master, hierarchies);
    session = std::make_unique<ProviderSession>(master, a.provider.support(master), a.provider.spec(constraints),
                                                constraints.mds);
    endpoint = std::make_unique<EmbeddedProvider>(*session);
  } else {
    if (a.remote_flags_set) {
      throw Error(ErrorCode::kInvalidArgument, "--support, --k, --levels, --x and --y need a master file");
    }
    const auto [host, port] = parse_address(a.master);
    endpoint = RemoteProvider::connect(host, port);
  }

  CleanOptions options;
  if (!a.budget_amount.empty()) {
    const Price amount = price_from_json(nlohmann::json::parse(a.budget_amount));
    if (!amount) throw Error(ErrorCode::kInvalidArgument, "budget must be finite");
    options.budget = *amount;
  } else {
    if (a.budget < 0) throw Error(ErrorCode::kInvalidArgument, "budget fraction must be non-negative");
    options.budget = Money::from_double(a.budget * endpoint->support_weight().to_double());
  }
  const LevelArg caps = LevelArg::parse(a.lmax);
  options.lmax = caps.global.value_or(0);
  options.lmax_by_attribute = caps.by_attribute;

  const CleanResult result = safe_clean(std::move(dirty), *endpoint, constraints.fds, options);
  nlohmann::json report = result.report.to_json();
  if (!a.truth.empty()) {
    const Relation truth = Relation::load_csv(a.truth, hierarchies);
    const Relation original = Relation::load_csv(a.client, hierarchies);
    const Metrics metrics(truth);
    report["quality"] = evaluate_repair(original, result.repaired, truth, result.report, metrics).to_json();
  }
  write_output(a.out, result.repaired.to_csv());
  if (!a.report.empty()) write_output(a.report, report.dump(2) + "\n");
  return 0;
}

// ---- price ----

struct PriceArgs {
  Inputs in;
  ProviderArgs provider;
  std::string master;
  std::string client;
  std::string tuple;
  std::string attr;
  int level = 0;
  bool pay = false;
};

int run_price(const PriceArgs& a) {
  const auto hierarchies = a.in.hierarchies();
  const Constraints constraints = a.in.constraints();
  const auto master = load_master(a.master, hierarchies);
  const Relation client = Relation::load_csv(a.client, hierarchies);
  ProviderSession session(master, a.provider.support(master), a.provider.spec(constraints), constraints.mds);
  const ValueRequest request{a.tuple, a.attr, a.level};
  const ClientTuple t = client_tuple(client, client.row_of(a.tuple));

  nlohmann::json out = {{"request", request.to_json()}};
  const Price quote = session.ask_price(request, t);
  out["price"] = price_to_json(quote);
  if (a.pay) {
    if (!quote) throw Error(ErrorCode::kUnsafeRequest, "the request is priced infinite");
    const Disclosure d = session.pay(*quote, request, t);
    out["value"] = d.value;
    out["level"] = d.level;
    out["requote"] = price_to_json(session.ask_price(request, t));
    out["support"] = session.support().size();
  }
  std::cout << out.dump() << "\n";
  return 0;
}

// ---- check-anon ----

struct CheckAnonArgs {
  Inputs in;
  ProviderArgs provider;
  std::string relation;
};

int run_check_anon(const CheckAnonArgs& a) {
  const auto hierarchies = a.in.hierarchies();
  const Constraints constraints = a.in.constraints();
  const Relation r = Relation::load_csv(a.relation, hierarchies);
  const AnonymitySpec spec = a.provider.spec(constraints);
  spec.validate(r);
  const auto sizes = group_sizes(r, spec);
  nlohmann::json groups = nlohmann::json::array();
  size_t smallest = sizes.empty() ? 0 : sizes.front();
  for (size_t i = 0; i < sizes.size(); ++i) {
    groups.push_back({{"tuple", r.id(i)}, {"size", sizes[i]}});
    smallest = std::min(smallest, sizes[i]);
  }
  const nlohmann::json out = {{"x", spec.x},       {"y", spec.y},     {"levels", spec.levels},
                              {"k", spec.k},       {"min", smallest}, {"anonymous", is_xyl_anonymous(r, spec)},
                              {"groups", groups}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---- inject ----

struct InjectArgs {
  Inputs in;
  std::string truth;
  double rate = 0.1;
  double constraint_share = 0.5;
  std::uint64_t seed = 1;
  std::string out;
  std::string manifest;
};

int run_inject(const InjectArgs& a) {
  const auto hierarchies = a.in.hierarchies();
  const Constraints constraints = a.in.constraints();
  const Relation truth = Relation::load_csv(a.truth, hierarchies);
  InjectionPlan plan;
  plan.rate = a.rate;
  plan.constraint_share = a.constraint_share;
  plan.seed = a.seed;
  const Injection injection = inject_errors(truth, constraints.fds, plan);
  write_output(a.out, injection.dirty.to_csv());
  if (!a.manifest.empty()) write_output(a.manifest, manifest_to_json(injection.manifest).dump(2) + "\n");
  return 0;
}

// ---- eval ----

struct EvalArgs {
  std::string sweep;
  std::string out = "results";
  int repetitions = 0;
  std::vector<std::string> axes;
  // Scoring a single repair instead of a sweep.
  std::vector<std::string> hierarchy_paths;
  std::string repaired;
  std::string dirty;
  std::string truth;
};

int run_eval(const EvalArgs& a) {
  if (!a.repaired.empty()) {
    if (a.truth.empty() || a.hierarchy_paths.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "--repaired needs --truth and --hierarchies");
    }
    const auto hierarchies = HierarchySet::load(a.hierarchy_paths);
    const Relation truth = Relation::load_csv(a.truth, hierarchies);
    const Relation repaired = Relation::load_csv(a.repaired, hierarchies);
    const Metrics metrics(truth);
    nlohmann::json out = {{"repair_error", metrics.relation_distance(repaired, truth)}};
    if (!a.dirty.empty()) {
      out["dirty_error"] = metrics.relation_distance(Relation::load_csv(a.dirty, hierarchies), truth);
    }
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  SweepConfig config;
  if (!a.sweep.empty()) config = SweepConfig::from_json(nlohmann::json::parse(read_file(a.sweep)));
  if (a.repetitions > 0) config.repetitions = a.repetitions;
  if (!a.axes.empty()) config.axes = a.axes;
  const SweepReport report = run_sweep(config);
  report.write(a.out);
  std::ofstream(fs::path(a.out) / "config.json") << config.to_json().dump(2) << "\n";
  std::cout << "wrote " << report.rows.size() << " grid points to " << a.out << "\n";
  return 0;
}

// ---- gen ----

struct GenArgs {
  std::string out = "synthetic";
  std::uint64_t seed = 1;
};

int run_gen(const GenArgs& a) {
  SyntheticConfig cfg;
  cfg.seed = a.seed;
  const Dataset data = generate_dataset(cfg);
  const fs::path dir(a.out);
  fs::create_directories(dir / "hierarchies");
  for (const auto& attr : data.hierarchies->attributes()) {
    std::ofstream(dir / "hierarchies" / (attr + ".json")) << data.hierarchies->at(attr).to_json().dump(1) << "\n";
  }
  std::ofstream(dir / "master.csv") << data.master->to_csv();
  std::ofstream(dir / "truth.csv") << data.truth.to_csv();
  std::ofstream(dir / "config.json") << data.constraints.to_json().dump(1) << "\n";
  std::cout << "wrote " << dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Privacy-aware data cleaning against a priced provider"};
  app.require_subcommand(1);

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run a provider endpoint");
  serve.in.add_to(serve_cmd);
  serve.provider.add_to(serve_cmd);
  serve_cmd->add_option("--master", serve.master, "Master relation CSV")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--host", serve.host)->capture_default_str();
  serve_cmd->add_option("--port", serve.port, "TCP port; 0 picks one")->capture_default_str();
  serve_cmd->add_flag("--stdio", serve.stdio, "Speak the protocol on stdin/stdout");

  CleanArgs clean;
  auto* clean_cmd = app.add_subcommand("clean", "Repair a client relation");
  clean.in.add_to(clean_cmd);
  clean.provider.add_to(clean_cmd);
  clean_cmd->add_option("--client", clean.client, "Dirty client CSV")->required()->check(CLI::ExistingFile);
  clean_cmd->add_option("--master", clean.master, "Master CSV (embedded) or host:port")->required();
  clean_cmd->add_option("--budget", clean.budget, "Budget as a fraction of the support-set weight")
      ->capture_default_str();
  clean_cmd->add_option("--budget-amount", clean.budget_amount, "Absolute budget; overrides --budget");
  clean_cmd->add_option("--lmax", clean.lmax, "Level cap: N or ATTR=N,...")->capture_default_str();
  clean_cmd->add_option("--truth", clean.truth, "Ground truth CSV for the repair error")->check(CLI::ExistingFile);
  clean_cmd->add_option("--out", clean.out, "Repaired CSV (default stdout)");
  clean_cmd->add_option("--report", clean.report, "JSON report path");

  PriceArgs price;
  auto* price_cmd = app.add_subcommand("price", "Quote, and optionally buy, one value request");
  price.in.add_to(price_cmd);
  price.provider.add_to(price_cmd);
  price_cmd->add_option("--master", price.master)->required()->check(CLI::ExistingFile);
  price_cmd->add_option("--client", price.client)->required()->check(CLI::ExistingFile);
  price_cmd->add_option("--tuple", price.tuple)->required();
  price_cmd->add_option("--attr", price.attr)->required();
  price_cmd->add_option("--level", price.level)->capture_default_str();
  price_cmd->add_flag("--pay", price.pay, "Pay the quote, then quote again");

  CheckAnonArgs anon;
  auto* anon_cmd = app.add_subcommand("check-anon", "Check (X,Y,L)-anonymity of a relation");
  anon.in.add_to(anon_cmd);
  anon.provider.add_to(anon_cmd);
  anon_cmd->add_option("--relation", anon.relation)->required()->check(CLI::ExistingFile);

  InjectArgs inject;
  auto* inject_cmd = app.add_subcommand("inject", "Corrupt a clean relation");
  inject.in.add_to(inject_cmd);
  inject_cmd->add_option("--truth", inject.truth)->required()->check(CLI::ExistingFile);
  inject_cmd->add_option("--rate", inject.rate)->capture_default_str();
  inject_cmd->add_option("--constraint-share", inject.constraint_share)->capture_default_str();
  inject_cmd->add_option("--seed", inject.seed)->capture_default_str();
  inject_cmd->add_option("--out", inject.out, "Dirty CSV (default stdout)");
  inject_cmd->add_option("--manifest", inject.manifest, "Manifest JSON path");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Run a parameter sweep, or score one repair");
  eval_cmd->add_option("--sweep", eval.sweep, "Sweep config JSON")->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval.out, "Results directory")->capture_default_str();
  eval_cmd->add_option("--repetitions", eval.repetitions);
  eval_cmd->add_option("--axes", eval.axes)->delimiter(',');
  eval_cmd->add_option("--hierarchies", eval.hierarchy_paths);
  eval_cmd->add_option("--repaired", eval.repaired)->check(CLI::ExistingFile);
  eval_cmd->add_option("--dirty", eval.dirty)->check(CLI::ExistingFile);
  eval_cmd->add_option("--truth", eval.truth)->check(CLI::ExistingFile);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Write the synthetic dataset");
  gen_cmd->add_option("--out", gen.out)->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (*serve_cmd) return run_serve(serve);
    if (*clean_cmd) {
      for (const char* opt : {"--support", "--support-size", "--k", "--levels", "--x", "--y"}) {
        clean.remote_flags_set = clean.remote_flags_set || clean_cmd->count(opt) > 0;
      }
      return run_clean(clean);
    }
    if (*price_cmd) return run_price(price);
    if (*anon_cmd) return run_check_anon(anon);
    if (*inject_cmd) return run_inject(inject);
    if (*eval_cmd) return run_eval(eval);
    if (*gen_cmd) return run_gen(gen);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return is_protocol_error(e.code()) ? kExitProtocol : kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "malformed_input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
