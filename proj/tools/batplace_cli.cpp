#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "batplace/batplace.hpp"

namespace bp = batplace;

namespace {

enum class Method { Oracle, Fast, Auto };

// exit codes
constexpr int kOk = 0;
constexpr int kAssumptionsFail = 1;
constexpr int kInputError = 2;
constexpr int kComputeError = 3;

struct SourceFlags {
  std::string case_path;
  std::string system;
  std::string generator = "II";
  std::uint64_t seed = 0;
  std::size_t horizon = 15;
  std::string admittance = "unit";
};

struct Config {
  SourceFlags src;
  Method method = Method::Auto;
  std::string battery;
  std::string out;
  std::optional<double> tol;
};

void add_source(CLI::App* cmd, SourceFlags& s) {
  auto* file = cmd->add_option("--case", s.case_path, "case file (JSON)")->check(CLI::ExistingFile);
  auto* sys = cmd->add_option("--system", s.system, "builtin grid: ieee15, ieee15m, ieee33, ... ieee123m, triangleN");
  file->excludes(sys);
  cmd->add_option("--generator", s.generator, "scenario generator for --system: I, II or III")->capture_default_str();
  cmd->add_option("--seed", s.seed, "seed for --system scenarios")->capture_default_str();
  cmd->add_option("--horizon", s.horizon, "horizon T for --system scenarios")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--admittance", s.admittance, "unit or random susceptance for --system")->capture_default_str();
}

void add_method(CLI::App* cmd, Method& m) {
  const std::map<std::string, Method> names{{"oracle", Method::Oracle}, {"fast", Method::Fast}, {"auto", Method::Auto}};
  cmd->add_option("--method", m, "oracle, fast or auto")->transform(CLI::CheckedTransformer(names, CLI::ignore_case));
}

bp::GridSource parse_source(const std::string& id) {
  std::string lower = id;
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower.rfind("triangle", 0) == 0) {
    const std::string digits = lower.substr(8);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
      throw bp::Error(bp::ErrorCode::ParseError, "expected triangleN, got '" + id + "'");
    return bp::TriangleFamily{std::stoul(digits)};
  }
  return bp::parse_ieee_system(lower);
}

bp::CaseData load(const SourceFlags& s) {
  if (!s.case_path.empty()) return bp::load_case(s.case_path);
  if (s.system.empty()) throw bp::Error(bp::ErrorCode::ParseError, "one of --case or --system is required");
  bp::CaseSpec spec;
  spec.source = parse_source(s.system);
  spec.generator = bp::parse_generator(s.generator);
  spec.seed = s.seed;
  spec.horizon = s.horizon;
  spec.admittance = bp::parse_admittance(s.admittance);
  auto inst = bp::gen_instance(spec);
  return {std::move(inst.grid), std::move(inst.scenario)};
}

bp::lp::Options lp_options(const Config& cfg) {
  bp::lp::Options o;
  if (cfg.tol) o.tolerance = *cfg.tol;
  return o;
}

bp::BusId bus_by_label(const bp::Grid& g, const std::string& label) {
  for (bp::BusId i = 0; i < g.bus_count(); ++i)
    if (g.label(i) == label) return i;
  throw bp::Error(bp::ErrorCode::BusOutOfRange, "no bus labelled '" + label + "' (grid has " +
                                                    std::to_string(g.bus_count()) + " buses)");
}

// Assumptions the fast path relies on: A2, A3 always, A5/A6 off trees.
std::vector<std::size_t> fast_requirements(bp::Topology topo) {
  if (topo == bp::Topology::Tree) return {1, 2};
  return {1, 2, 4, 5};
}

std::vector<std::size_t> violated(const bp::AssumptionReport& r, const std::vector<std::size_t>& required) {
  std::vector<std::size_t> out;
  const auto checks = r.checks();
  for (std::size_t k : required)
    if (!checks[k]->holds) out.push_back(k);
  return out;
}

// Whether the fast path may be used, with the reason when it may not.
std::optional<std::string> fast_blocker(const bp::Grid& g, const bp::Scenario& sc) {
  const auto topo = bp::classify_topology(g);
  if (topo == bp::Topology::General) return "topology is general";
  const auto bad = violated(bp::validate_assumptions(g, sc), fast_requirements(topo));
  if (bad.empty()) return std::nullopt;
  std::string why;
  for (std::size_t k : bad) why += (why.empty() ? "" : ", ") + std::string(bp::kAssumptionNames[k]);
  return why + " violated";
}

void print_vector(std::ostream& os, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i] + 0.0;  // no "-0"
}

int cmd_validate(const Config& cfg) {
  const auto data = load(cfg.src);
  const auto topo = bp::classify_topology(data.grid);
  const auto report = bp::validate_assumptions(data.grid, data.scenario);
  std::cout << "buses: " << data.grid.bus_count() << "\nlines: " << data.grid.line_count()
            << "\nhorizon: " << data.scenario.horizon() << "\ntopology: " << bp::to_string(topo) << '\n'
            << bp::describe(report);

  std::vector<std::size_t> required;
  std::string method = "oracle";
  if (cfg.method != Method::Oracle) {
    method = cfg.method == Method::Fast ? "fast" : "auto";
    if (topo == bp::Topology::General) {
      if (cfg.method == Method::Fast) {
        std::cout << "method fast: unsupported on general topology\n";
        return kAssumptionsFail;
      }
      std::cout << "method auto: general topology, oracle will be used\n";
    } else {
      required = fast_requirements(topo);
    }
  }
  const auto bad = violated(report, required);
  std::cout << "required by " << method << ":";
  if (required.empty()) std::cout << " none";
  for (std::size_t k : required) std::cout << " A" << k + 1;
  std::cout << '\n';
  if (bad.empty()) {
    std::cout << "result: ok\n";
    return kOk;
  }
  std::cout << "result: FAILED";
  for (std::size_t k : bad) std::cout << "; " << bp::kAssumptionNames[k];
  std::cout << '\n';
  return kAssumptionsFail;
}

int cmd_solve(const Config& cfg) {
  const auto data = load(cfg.src);
  const auto& g = data.grid;
  const auto& sc = data.scenario;
  if (cfg.battery.empty()) throw bp::Error(bp::ErrorCode::ParseError, "--battery is required");
  const bp::BusId b = bus_by_label(g, cfg.battery);

  bool fast = cfg.method == Method::Fast;
  if (cfg.method == Method::Auto) {
    if (auto why = fast_blocker(g, sc)) {
      std::cout << "notice: " << *why << "; falling back to oracle\n";
    } else {
      fast = true;
    }
  }
  std::cout << "method: " << (fast ? "fast" : "oracle") << "\nbattery: " << g.label(b) << '\n';

  if (fast) {
    const auto tab = bp::fast_maxflow_table(g, sc);
    const auto k = bp::adjustment_period(tab, sc, b);
    const auto s = bp::bang_bang_profile(tab, sc, b, k);
    std::cout << "cost: " << bp::analytic_cost(tab, sc, b) << "\nbase_cost: " << sc.base_cost() << "\ncontrol: ";
    print_vector(std::cout, s.control);
    std::cout << "\ninitial_soc: " << s.initial_soc << "\nadjustment_rank: " << k
              << "\nadjustment_period: " << s.adjustment() << "\ncongestion: not computed by the fast method\n";
    return kOk;
  }

  const auto opts = lp_options(cfg);
  const auto sol = bp::solve_dispatch(g, sc, b, opts);
  // adjustment rank from the exact inflow/outflow of this bus
  auto tab = bp::MaxflowTable::sized(g.bus_count(), sc.horizon(), bp::FlowSource::LpOracle);
  for (std::size_t t = 0; t < sc.horizon(); ++t) {
    const auto row = static_cast<Eigen::Index>(b), col = static_cast<Eigen::Index>(t);
    tab.inflow(row, col) = bp::solve_maxflow_lp(g, sc, b, t, bp::Direction::In, opts);
    tab.outflow(row, col) = bp::solve_maxflow_lp(g, sc, b, t, bp::Direction::Out, opts);
  }
  const auto k = bp::adjustment_period(tab, sc, b);
  std::size_t saturated = 0;
  for (Eigen::Index e = 0; e < sol.flow.rows(); ++e)
    for (Eigen::Index t = 0; t < sol.flow.cols(); ++t) {
      const double cap = g.line(static_cast<bp::LineId>(e)).capacity;
      if (std::abs(sol.flow(e, t)) >= cap * (1.0 - 1e-9)) ++saturated;
    }
  std::cout << "cost: " << sol.cost << "\nbase_cost: " << sc.base_cost() << "\ncontrol: ";
  print_vector(std::cout, sol.battery_control());
  std::cout << "\ninitial_soc: " << bp::recover_initial_soc(sol.battery_control()) << "\nadjustment_rank: " << k
            << "\nadjustment_period: " << bp::sort_periods(sc)[k - 1] << "\ncongestion: "
            << (saturated ? "yes (" + std::to_string(saturated) + " line-periods at capacity)" : std::string("no"))
            << "\nsimplex_iterations: " << sol.iterations << '\n';
  return kOk;
}

int cmd_place(const Config& cfg) {
  const auto data = load(cfg.src);
  const auto& g = data.grid;
  const auto& sc = data.scenario;

  bool fast = cfg.method == Method::Fast;
  if (cfg.method == Method::Auto) {
    if (auto why = fast_blocker(g, sc)) {
      std::cout << "notice: " << *why << "; falling back to oracle\n";
    } else {
      fast = true;
    }
  }
  bp::PlacementReport rep;
  if (fast) {
    rep = bp::evaluate_placement(g, sc, bp::InflowBackend::FastPath);
    rep.method = "fast";
  } else {
    bp::EnumerationOptions eo;
    eo.lp = lp_options(cfg);
    rep = bp::solve_placement_enumeration(g, sc, eo);
  }
  std::cout << "method: " << rep.method << "\nbase_cost: " << rep.base_cost << '\n';
  for (bp::BusId i = 0; i < g.bus_count(); ++i)
    std::cout << "bus " << g.label(i) << ": " << rep.cost_per_bus[static_cast<Eigen::Index>(i)] << '\n';
  std::cout << "best_bus: " << g.label(rep.best_bus) << "\nbest_cost: "
            << rep.cost_per_bus[static_cast<Eigen::Index>(rep.best_bus)] << "\nseconds: " << rep.timings.total_seconds
            << '\n';

  if (!cfg.out.empty()) {
    std::ofstream out(cfg.out);
    if (!out) throw bp::Error(bp::ErrorCode::Io, "cannot write '" + cfg.out + "'");
    out.imbue(std::locale::classic());
    out << "bus,cost,method\n" << std::setprecision(15);
    for (bp::BusId i = 0; i < g.bus_count(); ++i)
      out << g.label(i) << ',' << rep.cost_per_bus[static_cast<Eigen::Index>(i)] << ',' << rep.method << '\n';
    if (!out) throw bp::Error(bp::ErrorCode::Io, "write to '" + cfg.out + "' failed");
  }
  return kOk;
}

struct BenchFlags {
  std::vector<std::string> systems;
  std::string family;
  std::string sizes = "15:55:10";
  std::string file;
  std::vector<std::string> cases{"I"};
  std::size_t reps = 1;
  std::uint64_t seed = 0;
  std::size_t horizon = 15;
  std::string admittance = "unit";
  std::string oracle = "dispatch";
  bool budgeted = false;
  std::string out = "bench.csv";
};

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos)
      throw bp::Error(bp::ErrorCode::ParseError, "--sizes expects lo:hi:step or a single size, got '" + text + "'");
    parts.push_back(std::stoul(item));
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3 || parts[2] == 0 || parts[0] > parts[1])
    throw bp::Error(bp::ErrorCode::ParseError, "--sizes expects lo:hi:step, got '" + text + "'");
  std::vector<std::size_t> out;
  for (std::size_t n = parts[0]; n <= parts[1]; n += parts[2]) out.push_back(n);
  return out;
}

int cmd_bench(const BenchFlags& f) {
  std::vector<bp::GridSource> sources;
  for (const auto& s : f.systems) sources.push_back(parse_source(s));
  if (!f.family.empty()) {
    if (f.family != "triangle") throw bp::Error(bp::ErrorCode::ParseError, "unknown family '" + f.family + "'");
    for (std::size_t n : parse_sizes(f.sizes)) sources.push_back(bp::TriangleFamily{n});
  }
  if (!f.file.empty()) sources.push_back(bp::FromFile{f.file});
  if (sources.empty()) throw bp::Error(bp::ErrorCode::ParseError, "give --system, --family or --file");

  std::vector<bp::CaseSpec> specs;
  for (const auto& src : sources)
    for (const auto& c : f.cases) {
      bp::CaseSpec spec;
      spec.source = src;
      spec.generator = bp::parse_generator(c);
      spec.seed = f.seed;
      spec.horizon = f.horizon;
      spec.admittance = bp::parse_admittance(f.admittance);
      specs.push_back(spec);
    }
  bp::BenchOptions opts;
  if (f.oracle == "dispatch") opts.oracle = bp::OracleKind::Dispatch;
  else if (f.oracle == "maxflow") opts.oracle = bp::OracleKind::Maxflow;
  else throw bp::Error(bp::ErrorCode::ParseError, "--oracle must be dispatch or maxflow");
  opts.budgeted = f.budgeted;

  const auto result = bp::run_benchmark(specs, f.reps, f.out, opts);

  // summary: one line per (case, generator, admittance)
  struct Acc {
    std::size_t rows = 0;
    double delta = 0, delta_a = 0, delta_m = 0, delta_w = 0, t_a = 0, t_s = 0;
  };
  std::map<std::string, Acc> groups;
  std::vector<std::string> order;
  for (const auto& r : result.rows) {
    const std::string key = r.case_name + " case " + r.generator + " " + r.admittance_mode;
    if (!groups.count(key)) order.push_back(key);
    auto& a = groups[key];
    ++a.rows;
    a.delta += r.metrics.delta;
    a.delta_a += r.metrics.delta_a;
    a.delta_m += r.metrics.delta_m;
    a.delta_w += r.metrics.delta_w;
    a.t_a += r.t_a_seconds;
    a.t_s += r.t_s_seconds;
  }
  for (const auto& key : order) {
    const auto& a = groups[key];
    const double n = static_cast<double>(a.rows);
    std::cout << key << ": rows " << a.rows << ", mean delta " << a.delta / n << ", mean delta_a " << a.delta_a / n
              << ", mean delta_m " << a.delta_m / n << ", mean delta_w " << a.delta_w / n << ", mean t_a "
              << a.t_a / n << " s, mean t_s " << a.t_s / n << " s\n";
  }
  for (const auto& fail : result.failures)
    std::cerr << "failed: " << fail.case_name << " case " << fail.generator << " seed " << fail.seed << ": "
              << fail.message << '\n';
  std::cout << "rows: " << result.rows.size() << ", failures: " << result.failures.size() << ", csv: " << f.out << '\n';
  return result.failures.empty() ? kOk : kComputeError;
}

int cmd_gen_case(const SourceFlags& s, const std::string& out) {
  if (s.system.empty()) throw bp::Error(bp::ErrorCode::ParseError, "--system is required");
  const auto data = load(s);
  const std::string text = bp::dump_case(data.grid, data.scenario);
  if (out.empty() || out == "-") {
    std::cout << text << '\n';
    return kOk;
  }
  bp::save_case(data.grid, data.scenario, out);
  std::cout << "wrote " << out << '\n';
  return kOk;
}

int exit_code_for(bp::ErrorCode code) {
  switch (code) {
    case bp::ErrorCode::ParseError:
    case bp::ErrorCode::Io:
    case bp::ErrorCode::InvalidGrid:
    case bp::ErrorCode::DisconnectedGrid:
    case bp::ErrorCode::InvalidScenario:
    case bp::ErrorCode::DimensionMismatch:
    case bp::ErrorCode::BusOutOfRange: return kInputError;
    default: return kComputeError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Battery placement on DC power grids"};
  app.require_subcommand(1);

  Config cfg;
  auto add_common = [&cfg](CLI::App* cmd) {
    add_source(cmd, cfg.src);
    cmd->add_option("--tol", cfg.tol, "simplex tolerance override")->check(CLI::PositiveNumber);
  };

  auto* validate = app.add_subcommand("validate", "topology class and assumption report");
  add_common(validate);
  add_method(validate, cfg.method);

  auto* solve = app.add_subcommand("solve", "dispatch with the battery at one bus");
  add_common(solve);
  add_method(solve, cfg.method);
  solve->add_option("--battery", cfg.battery, "battery bus label")->required();

  auto* place = app.add_subcommand("place", "optimal battery bus");
  add_common(place);
  add_method(place, cfg.method);
  place->add_option("--out", cfg.out, "per-bus cost CSV");

  BenchFlags bench_flags;
  auto* bench = app.add_subcommand("bench", "benchmark the fast method against the oracle");
  bench->add_option("--system", bench_flags.systems, "builtin grid ids (repeatable)");
  bench->add_option("--family", bench_flags.family, "generated family: triangle");
  bench->add_option("--sizes", bench_flags.sizes, "family sizes lo:hi:step")->capture_default_str();
  bench->add_option("--file", bench_flags.file, "case file whose topology is used");
  bench->add_option("--case,--cases", bench_flags.cases, "generators, e.g. I,II")->delimiter(',')->capture_default_str();
  bench->add_option("--reps", bench_flags.reps, "repetitions per configuration")->capture_default_str();
  bench->add_option("--seed", bench_flags.seed, "first seed; repetition r uses seed + r")->capture_default_str();
  bench->add_option("--horizon", bench_flags.horizon, "horizon T")->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--admittance", bench_flags.admittance, "unit or random")->capture_default_str();
  bench->add_option("--oracle", bench_flags.oracle, "dispatch or maxflow")->capture_default_str();
  bench->add_flag("--budgeted", bench_flags.budgeted, "also run a deadline-limited oracle for delta_t");
  bench->add_option("--out", bench_flags.out, "CSV path")->capture_default_str();

  SourceFlags gen_flags;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-case", "write a generated case file");
  add_source(gen, gen_flags);
  gen->add_option("--out", gen_out, "output path, - for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  std::cout << std::setprecision(15);
  try {
    if (*validate) return cmd_validate(cfg);
    if (*solve) return cmd_solve(cfg);
    if (*place) return cmd_place(cfg);
    if (*bench) return cmd_bench(bench_flags);
    if (*gen) return cmd_gen_case(gen_flags, gen_out);
  } catch (const bp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kComputeError;
  }
  return kInputError;
}
