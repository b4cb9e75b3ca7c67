#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "batplace/assumptions.hpp"
#include "batplace/case_file.hpp"
#include "batplace/ieee_feeders.hpp"
#include "batplace/oracle.hpp"
#include "batplace/placement.hpp"
#include "batplace/schedule.hpp"

namespace batplace {

enum class Generator { CaseI, CaseII, CaseIII };
enum class AdmittanceMode { Unit, RandomU01 };

inline std::string_view to_string(Generator g) {
  switch (g) {
    case Generator::CaseI: return "I";
    case Generator::CaseII: return "II";
    case Generator::CaseIII: return "III";
  }
  return "?";
}

inline Generator parse_generator(const std::string& s) {
  if (s == "I" || s == "i" || s == "1") return Generator::CaseI;
  if (s == "II" || s == "ii" || s == "2") return Generator::CaseII;
  if (s == "III" || s == "iii" || s == "3") return Generator::CaseIII;
  throw Error(ErrorCode::ParseError, "unknown case generator '" + s + "' (expected I, II or III)");
}

inline std::string_view to_string(AdmittanceMode a) { return a == AdmittanceMode::Unit ? "unit" : "random"; }

inline AdmittanceMode parse_admittance(const std::string& s) {
  if (s == "unit") return AdmittanceMode::Unit;
  if (s == "random" || s == "u01") return AdmittanceMode::RandomU01;
  throw Error(ErrorCode::ParseError, "unknown admittance mode '" + s + "' (expected unit or random)");
}

struct TriangleFamily {
  std::size_t n = 3;
};
struct FromFile {
  std::string path;
};
using GridSource = std::variant<IeeeSystem, TriangleFamily, FromFile>;

inline std::string source_name(const GridSource& src) {
  if (const auto* s = std::get_if<IeeeSystem>(&src)) return std::string(to_string(*s));
  if (const auto* t = std::get_if<TriangleFamily>(&src)) return "triangle" + std::to_string(t->n);
  return std::get<FromFile>(src).path;
}

struct CaseSpec {
  Generator generator = Generator::CaseI;
  std::uint64_t seed = 0;
  GridSource source = IeeeSystem::Ieee15M;
  AdmittanceMode admittance = AdmittanceMode::Unit;
  std::size_t horizon = 15;
};

struct Instance {
  Grid grid;
  Scenario scenario;
};

namespace detail {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

// Normal with mean `mean` and variance `variance`, conditioned on [lo, hi].
inline double truncated_normal(Rng& rng, double mean, double variance, double lo, double hi) {
  std::normal_distribution<double> dist(mean, std::sqrt(variance));
  for (;;) {
    const double x = dist(rng);
    if (x >= lo && x <= hi) return x;
  }
}

inline Rng make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return Rng(seq);
}

inline Scenario draw_scenario(Rng& rng, std::size_t n, Generator gen, std::size_t horizon) {
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(horizon);
  Eigen::VectorXd cost(cols);
  for (Eigen::Index t = 0; t < cols; ++t) {
    for (;;) {
      double c = uniform(rng, 0.0, 1.0);
      if (c <= 0.0) continue;
      if (std::find(cost.data(), cost.data() + t, c) != cost.data() + t) continue;
      cost[t] = c;
      break;
    }
  }
  Eigen::MatrixXd demand(rows, cols), cap(rows, cols);
  for (Eigen::Index t = 0; t < cols; ++t)
    for (Eigen::Index i = 0; i < rows; ++i) demand(i, t) = uniform(rng, 1.0, 2.0);
  for (Eigen::Index t = 0; t < cols; ++t)
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (gen == Generator::CaseII) {
        cap(i, t) = demand(i, t) + uniform(rng, 0.0, 1.0);
      } else {
        const bool big = std::bernoulli_distribution(0.1)(rng);
        cap(i, t) = big ? 2.0 + truncated_normal(rng, 0.0, 4.0, -20.0, 20.0) + 100.0
                        : 2.0 + truncated_normal(rng, 0.0, 1.0, 0.0, 1.0);
      }
    }
  return Scenario(std::move(cost), std::move(demand), std::move(cap));
}

inline Grid base_grid(const GridSource& src) {
  if (const auto* s = std::get_if<IeeeSystem>(&src)) return build_ieee_case(*s);
  if (const auto* t = std::get_if<TriangleFamily>(&src)) return gen_triangle_family(t->n);
  return load_case(std::get<FromFile>(src).path).grid;
}

}  // namespace detail

// Scenario draws for a grid: c ~ U(0,1) without repeats, d ~ U(1,2), and the
// generation caps of the chosen case. Deterministic in (grid size, case, seed).
inline Scenario gen_scenario(const Grid& grid, Generator gen, std::uint64_t seed, std::size_t horizon = 15) {
  auto rng = detail::make_rng(seed);
  return detail::draw_scenario(rng, grid.bus_count(), gen, horizon);
}

// Full instance: scenario draws first, then Case III line capacities
// ~ TN(1,1,0.01,1), then susceptances ~ U(0,1) floored at 1e-3 if random.
inline Instance gen_instance(const CaseSpec& spec) {
  Grid grid = detail::base_grid(spec.source);
  auto rng = detail::make_rng(spec.seed);
  Scenario sc = detail::draw_scenario(rng, grid.bus_count(), spec.generator, spec.horizon);
  std::vector<double> cap, sus;
  for (const Line& l : grid.lines()) {
    cap.push_back(l.capacity);
    sus.push_back(l.susceptance);
  }
  if (spec.generator == Generator::CaseIII)
    for (double& f : cap) f = detail::truncated_normal(rng, 1.0, 1.0, 0.01, 1.0);
  if (spec.admittance == AdmittanceMode::RandomU01)
    for (double& s : sus) {
      do s = detail::uniform(rng, 0.0, 1.0);
      while (s < 1e-3);
    }
  if (spec.generator == Generator::CaseIII || spec.admittance == AdmittanceMode::RandomU01)
    grid = grid.with_line_parameters(cap, sus);
  return {std::move(grid), std::move(sc)};
}

struct DeltaMetrics {
  double delta = 0.0;    // best relative saving over no battery
  double delta_a = 0.0;  // excess cost of the proposed bus
  double delta_m = 0.0;  // excess cost of the average bus
  double delta_w = 0.0;  // excess cost of the worst bus
  double performance_increase = 0.0;
  std::optional<double> delta_t;
};

// `fast` proposes a bus; `oracle` supplies the true per-bus costs.
inline DeltaMetrics compute_deltas(const PlacementReport& fast, const PlacementReport& oracle) {
  if (fast.instance != oracle.instance)
    throw Error(ErrorCode::MismatchedInstance, "reports were computed on different instances");
  if (!oracle.complete || !oracle.cost_per_bus.allFinite())
    throw Error(ErrorCode::InvalidScenario, "oracle report is incomplete");
  const auto& cost = oracle.cost_per_bus;
  const auto b_fast = static_cast<Eigen::Index>(fast.best_bus);
  if (b_fast >= cost.size()) throw Error(ErrorCode::BusOutOfRange, "proposed bus outside the oracle report");
  const double best = cost[static_cast<Eigen::Index>(oracle.best_bus)];
  DeltaMetrics d;
  d.delta = (oracle.base_cost - best) / oracle.base_cost;
  d.delta_a = (cost[b_fast] - best) / best;
  d.delta_m = (cost.mean() - best) / best;
  d.delta_w = (cost.maxCoeff() - best) / best;
  d.performance_increase = std::max(d.delta_m - d.delta_a, 0.0);
  return d;
}

// Upper bound on the relative saving at bus b: demand of b and its
// neighbours times the spread of each period's cost above the cheapest.
inline double delta_upper_bound(const Grid& grid, const Scenario& sc, BusId b) {
  sc.check_compatible(grid);
  grid.check_bus(b);
  const double cmin = sc.costs().minCoeff();
  double total = 0.0;
  for (std::size_t t = 0; t < sc.horizon(); ++t) {
    double local = sc.demand(b, t);
    for (const auto& inc : grid.incident(b)) local += sc.demand(inc.neighbor, t);
    total += local * (sc.cost(t) - cmin);
  }
  return total / sc.base_cost();
}

enum class OracleKind { Dispatch, Maxflow };

inline std::string_view to_string(OracleKind k) { return k == OracleKind::Dispatch ? "dispatch" : "maxflow"; }

struct BenchOptions {
  OracleKind oracle = OracleKind::Dispatch;
  bool budgeted = false;  // also run the oracle with 10x the fast wall time
  double budget_factor = 10.0;
};

struct BenchRow {
  std::string case_name;
  std::string generator;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  std::string admittance_mode;
  double t_a_seconds = 0.0;
  double t_s_seconds = 0.0;
  DeltaMetrics metrics;
  std::string b_star;
  std::string b_fast;
  std::string assumption_flags;
};

struct BenchFailure {
  std::string case_name;
  std::string generator;
  std::uint64_t seed = 0;
  std::string message;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::vector<BenchFailure> failures;
};

// One repetition: fast method, oracle, metrics.
inline BenchRow run_case(const CaseSpec& spec, const BenchOptions& options = {}) {
  using clock = std::chrono::steady_clock;
  const Instance inst = gen_instance(spec);
  BenchRow row;
  row.case_name = source_name(spec.source);
  row.generator = std::string(to_string(spec.generator));
  row.seed = spec.seed;
  row.n = inst.grid.bus_count();
  row.m = inst.grid.line_count();
  row.admittance_mode = std::string(to_string(spec.admittance));
  row.assumption_flags = validate_assumptions(inst.grid, inst.scenario).flags();

  const PlacementReport fast = evaluate_placement(inst.grid, inst.scenario, InflowBackend::FastPath);
  row.t_a_seconds = fast.timings.total_seconds;

  PlacementReport oracle;
  if (options.oracle == OracleKind::Dispatch) {
    oracle = solve_placement_enumeration(inst.grid, inst.scenario);
  } else {
    oracle = evaluate_placement(inst.grid, inst.scenario, InflowBackend::LpOracle);
  }
  row.t_s_seconds = oracle.timings.solve_seconds;
  row.metrics = compute_deltas(fast, oracle);
  row.b_star = inst.grid.label(oracle.best_bus);
  row.b_fast = inst.grid.label(fast.best_bus);

  if (options.budgeted) {
    EnumerationOptions eo;
    const auto budget = std::chrono::duration<double>(options.budget_factor * row.t_a_seconds);
    eo.deadline = clock::now() + std::chrono::duration_cast<clock::duration>(budget);
    const PlacementReport partial = solve_placement_enumeration(inst.grid, inst.scenario, eo);
    const double best = oracle.cost_per_bus[static_cast<Eigen::Index>(oracle.best_bus)];
    // nothing finished in time: the fallback is running without a battery
    double found = oracle.base_cost;
    for (Eigen::Index i = 0; i < partial.cost_per_bus.size(); ++i)
      if (std::isfinite(partial.cost_per_bus[i])) found = std::min(found, partial.cost_per_bus[i]);
    row.metrics.delta_t = (found - best) / best;
  }
  return row;
}

inline void sort_rows(std::vector<BenchRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
    return std::tie(a.case_name, a.generator, a.admittance_mode, a.seed) <
           std::tie(b.case_name, b.generator, b.admittance_mode, b.seed);
  });
}

inline const char* kCsvHeader =
    "case_name,generator,seed,n,m,admittance_mode,t_a_seconds,t_s_seconds,delta,delta_a,delta_m,delta_w,delta_t,"
    "b_star,b_fast,assumption_flags";

inline void write_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out.imbue(std::locale::classic());
  out << kCsvHeader << '\n' << std::setprecision(15);
  for (const auto& r : rows) {
    out << r.case_name << ',' << r.generator << ',' << r.seed << ',' << r.n << ',' << r.m << ',' << r.admittance_mode
        << ',' << r.t_a_seconds << ',' << r.t_s_seconds << ',' << r.metrics.delta << ',' << r.metrics.delta_a << ','
        << r.metrics.delta_m << ',' << r.metrics.delta_w << ',';
    if (r.metrics.delta_t) out << *r.metrics.delta_t;
    out << ',' << r.b_star << ',' << r.b_fast << ',' << r.assumption_flags << '\n';
  }
}

// Runs `repetitions` seeds (spec.seed + r) of every spec. Failing instances
// are collected rather than aborting the run. Rows are sorted before writing.
inline BenchResult run_benchmark(const std::vector<CaseSpec>& specs, std::size_t repetitions,
                                 const std::string& out_path = {}, const BenchOptions& options = {}) {
  BenchResult result;
  for (const auto& base : specs)
    for (std::size_t r = 0; r < repetitions; ++r) {
      CaseSpec spec = base;
      spec.seed = base.seed + r;
      try {
        result.rows.push_back(run_case(spec, options));
      } catch (const std::exception& e) {
        result.failures.push_back({source_name(spec.source), std::string(to_string(spec.generator)), spec.seed, e.what()});
      }
    }
  sort_rows(result.rows);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + out_path + "'");
    write_csv(out, result.rows);
    if (!out) throw Error(ErrorCode::Io, "write to '" + out_path + "' failed");
  }
  return result;
}

}  // namespace batplace
