#pragma once

#include <atomic>
#include <chrono>
#include <exception>
#include <cstdint>
#include <cstring>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "batplace/grid.hpp"
#include "batplace/simplex.hpp"
#include "batplace/topology.hpp"

namespace batplace {

// Multipliers of the dispatch LP. Shapes: lmp and gen bounds n x T, line
// bounds m x T. All line/generation multipliers are >= 0.
struct DispatchDuals {
  Eigen::MatrixXd lmp;
  Eigen::MatrixXd line_lower;
  Eigen::MatrixXd line_upper;
  Eigen::MatrixXd gen_lower;
  Eigen::MatrixXd gen_upper;
  double cyclic = 0.0;  // multiplier of sum_t u_{b,t} = 0
};

struct DispatchSolution {
  BusId battery = 0;
  Eigen::MatrixXd generation;  // n x T
  Eigen::MatrixXd angle;       // n x T, zero at the battery bus
  Eigen::MatrixXd control;     // n x T, nonzero only on the battery row; > 0 discharges
  Eigen::MatrixXd flow;        // m x T, from -> to positive
  double cost = 0.0;
  DispatchDuals duals;
  std::int64_t iterations = 0;

  Eigen::VectorXd battery_control() const { return control.row(static_cast<Eigen::Index>(battery)).transpose(); }
};

namespace detail {

inline void require_optimal(const lp::Solution& sol, const std::string& what) {
  switch (sol.status) {
    case lp::Status::Optimal: return;
    case lp::Status::Infeasible: throw Error(ErrorCode::Infeasible, what + " has no feasible solution");
    default:
      throw Error(ErrorCode::NumericalFailure, what + " ended with status " + std::string(lp::to_string(sol.status)));
  }
}

// Shared network rows for one period: variables [g (gen_count), p (m)] at
// `offset`, balance rows for the buses in `balance_buses` and one Kirchhoff
// row per fundamental cycle. gen_index[i] is the position of g_i within the
// period block or -1 if the bus has no generation variable.
struct NetworkLayout {
  std::vector<BusId> balance_buses;
  std::vector<Eigen::Index> balance_row_of;  // bus -> row offset within the period, -1 if none
  std::vector<Eigen::Index> gen_index;
  Eigen::Index gen_count = 0;
  Eigen::Index rows_per_period = 0;
  Eigen::Index vars_per_period = 0;
  std::vector<std::vector<CycleTerm>> cycles;
};

inline NetworkLayout make_layout(const Grid& grid, std::optional<BusId> skip) {
  NetworkLayout lay;
  const std::size_t n = grid.bus_count();
  lay.balance_row_of.assign(n, -1);
  lay.gen_index.assign(n, -1);
  for (BusId i = 0; i < n; ++i) {
    if (skip && *skip == i) continue;
    lay.balance_row_of[i] = static_cast<Eigen::Index>(lay.balance_buses.size());
    lay.balance_buses.push_back(i);
    lay.gen_index[i] = lay.gen_count++;
  }
  lay.cycles = fundamental_cycles(grid, bfs_spanning_tree(grid, 0));
  lay.rows_per_period = static_cast<Eigen::Index>(lay.balance_buses.size() + lay.cycles.size());
  lay.vars_per_period = lay.gen_count + static_cast<Eigen::Index>(grid.line_count());
  return lay;
}

// Fills the rows of one period. Returns nothing; rhs gets the demands.
inline void fill_period(const Grid& grid, const Scenario& sc, std::size_t t, const NetworkLayout& lay,
                        Eigen::Index row0, Eigen::Index var0, lp::LinearProgram& prog) {
  for (BusId i : lay.balance_buses) {
    const Eigen::Index r = row0 + lay.balance_row_of[i];
    prog.equality(r, var0 + lay.gen_index[i]) = 1.0;
    prog.rhs[r] = sc.demand(i, t);
    const Eigen::Index g = var0 + lay.gen_index[i];
    prog.lower[g] = 0.0;
    prog.upper[g] = sc.gen_cap(i, t);
  }
  for (LineId e = 0; e < grid.line_count(); ++e) {
    const Line& l = grid.line(e);
    const Eigen::Index p = var0 + lay.gen_count + static_cast<Eigen::Index>(e);
    prog.lower[p] = -l.capacity;
    prog.upper[p] = l.capacity;
    if (lay.balance_row_of[l.from] >= 0) prog.equality(row0 + lay.balance_row_of[l.from], p) = -1.0;
    if (lay.balance_row_of[l.to] >= 0) prog.equality(row0 + lay.balance_row_of[l.to], p) = 1.0;
  }
  const auto base = row0 + static_cast<Eigen::Index>(lay.balance_buses.size());
  for (std::size_t k = 0; k < lay.cycles.size(); ++k)
    for (const CycleTerm& term : lay.cycles[k])
      prog.equality(base + static_cast<Eigen::Index>(k), var0 + lay.gen_count + static_cast<Eigen::Index>(term.line)) =
          term.sign / grid.line(term.line).susceptance;
}

// Angles from line flows: BFS from `root` with the root pinned at zero.
inline Eigen::VectorXd angles_from_flows(const Grid& grid, BusId root, const Eigen::VectorXd& flow) {
  const SpanningTree tree = bfs_spanning_tree(grid, root);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.bus_count()));
  for (BusId v : tree.order) {
    if (v == root) continue;
    const LineId e = tree.parent_line[v];
    const Line& l = grid.line(e);
    const double drop = flow[static_cast<Eigen::Index>(e)] / l.susceptance;  // theta_from - theta_to
    const auto pv = static_cast<Eigen::Index>(tree.parent[v]);
    theta[static_cast<Eigen::Index>(v)] = (l.from == v) ? theta[pv] + drop : theta[pv] - drop;
  }
  return theta;
}

}  // namespace detail

// Multi-period dispatch with a cyclic battery at bus b, written in line-flow
// form: per period, generation and line flows with nodal balance and one
// Kirchhoff loop row per independent cycle; then T battery controls at b and
// the cyclic row sum_t u_t = 0.
inline lp::LinearProgram build_dispatch_lp(const Grid& grid, const Scenario& sc, BusId b,
                                           detail::NetworkLayout* layout_out = nullptr) {
  sc.check_compatible(grid);
  grid.check_bus(b);
  const auto lay = detail::make_layout(grid, std::nullopt);
  const auto horizon = static_cast<Eigen::Index>(sc.horizon());
  const Eigen::Index rows = horizon * lay.rows_per_period + 1;
  const Eigen::Index vars = horizon * lay.vars_per_period + horizon;
  auto prog = lp::LinearProgram::with_shape(rows, vars);
  for (Eigen::Index t = 0; t < horizon; ++t) {
    const Eigen::Index row0 = t * lay.rows_per_period;
    const Eigen::Index var0 = t * lay.vars_per_period;
    detail::fill_period(grid, sc, static_cast<std::size_t>(t), lay, row0, var0, prog);
    for (Eigen::Index i = 0; i < lay.gen_count; ++i) prog.objective[var0 + i] = sc.cost(static_cast<std::size_t>(t));
    const Eigen::Index u = horizon * lay.vars_per_period + t;
    prog.equality(row0 + lay.balance_row_of[b], u) = 1.0;
    prog.equality(rows - 1, u) = 1.0;
  }
  if (layout_out) *layout_out = lay;
  return prog;
}

inline DispatchSolution solve_dispatch(const Grid& grid, const Scenario& sc, BusId b, const lp::Options& options = {}) {
  detail::NetworkLayout lay;
  const auto prog = build_dispatch_lp(grid, sc, b, &lay);
  const auto sol = lp::solve_lp(prog, options);
  detail::require_optimal(sol, "dispatch with battery at bus " + std::to_string(b));

  const auto n = static_cast<Eigen::Index>(grid.bus_count());
  const auto m = static_cast<Eigen::Index>(grid.line_count());
  const auto horizon = static_cast<Eigen::Index>(sc.horizon());
  DispatchSolution out;
  out.battery = b;
  out.cost = sol.objective;
  out.iterations = sol.iterations;
  out.generation.resize(n, horizon);
  out.angle.resize(n, horizon);
  out.control = Eigen::MatrixXd::Zero(n, horizon);
  out.flow.resize(m, horizon);
  auto& du = out.duals;
  du.lmp.resize(n, horizon);
  du.gen_lower.resize(n, horizon);
  du.gen_upper.resize(n, horizon);
  du.line_lower.resize(m, horizon);
  du.line_upper.resize(m, horizon);
  for (Eigen::Index t = 0; t < horizon; ++t) {
    const Eigen::Index row0 = t * lay.rows_per_period;
    const Eigen::Index var0 = t * lay.vars_per_period;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index g = var0 + lay.gen_index[static_cast<std::size_t>(i)];
      out.generation(i, t) = sol.primal[g];
      du.lmp(i, t) = sol.dual[row0 + lay.balance_row_of[static_cast<std::size_t>(i)]];
      du.gen_lower(i, t) = std::max(0.0, sol.reduced_cost[g]);
      du.gen_upper(i, t) = std::max(0.0, -sol.reduced_cost[g]);
    }
    for (Eigen::Index e = 0; e < m; ++e) {
      const Eigen::Index p = var0 + lay.gen_count + e;
      out.flow(e, t) = sol.primal[p];
      du.line_lower(e, t) = std::max(0.0, sol.reduced_cost[p]);
      du.line_upper(e, t) = std::max(0.0, -sol.reduced_cost[p]);
    }
    out.control(static_cast<Eigen::Index>(b), t) = sol.primal[horizon * lay.vars_per_period + t];
    out.angle.col(t) = detail::angles_from_flows(grid, b, out.flow.col(t));
  }
  du.cyclic = sol.dual[prog.row_count() - 1];
  return out;
}

enum class Direction { In, Out };

// Maximum inflow into (In) or outflow from (Out) bus b in period t over
// the feasible dispatch set. Bus b has no generation variable and no balance
// row, so it acts as a free source/sink.
inline double solve_maxflow_lp(const Grid& grid, const Scenario& sc, BusId b, std::size_t t, Direction dir,
                               const lp::Options& options = {}) {
  sc.check_compatible(grid);
  grid.check_bus(b);
  if (t >= sc.horizon()) throw Error(ErrorCode::DimensionMismatch, "period " + std::to_string(t) + " beyond horizon");
  const auto lay = detail::make_layout(grid, b);
  auto prog = lp::LinearProgram::with_shape(lay.rows_per_period, lay.vars_per_period);
  detail::fill_period(grid, sc, t, lay, 0, 0, prog);
  const double sign = dir == Direction::In ? -1.0 : 1.0;
  for (Eigen::Index i = 0; i < lay.gen_count; ++i) prog.objective[i] = sign;
  const auto sol = lp::solve_lp(prog, options);
  detail::require_optimal(sol, std::string(dir == Direction::In ? "inflow" : "outflow") + " problem at bus " +
                                   std::to_string(b));
  double other_demand = 0.0;
  for (BusId i : lay.balance_buses) other_demand += sc.demand(i, t);
  return dir == Direction::In ? -sol.objective - other_demand : other_demand - sol.objective;
}

// Smallest initial state of charge keeping every partial level >= 0 when the
// level evolves as x_{t+1} = x_t - u_t.
inline double recover_initial_soc(const Eigen::VectorXd& control) {
  double running = 0.0, need = 0.0;
  for (Eigen::Index t = 0; t < control.size(); ++t) {
    running += control[t];
    need = std::max(need, running);
  }
  return need;
}

inline double recover_initial_soc(const DispatchSolution& dispatch, BusId b) {
  return recover_initial_soc(Eigen::VectorXd(dispatch.control.row(static_cast<Eigen::Index>(b)).transpose()));
}

// FNV-1a over the numeric content of a grid and scenario; ties reports
// computed by different methods to the same instance.
inline std::uint64_t instance_hash(const Grid& grid, const Scenario& sc) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < len; ++k) {
      h ^= bytes[k];
      h *= 1099511628211ull;
    }
  };
  auto mix_double = [&mix](double v) { mix(&v, sizeof v); };
  auto mix_size = [&mix](std::uint64_t v) { mix(&v, sizeof v); };
  mix_size(grid.bus_count());
  for (const Line& l : grid.lines()) {
    mix_size(l.from);
    mix_size(l.to);
    mix_double(l.capacity);
    mix_double(l.susceptance);
  }
  mix_size(sc.horizon());
  for (Eigen::Index t = 0; t < sc.costs().size(); ++t) mix_double(sc.costs()[t]);
  for (Eigen::Index t = 0; t < sc.demands().cols(); ++t)
    for (Eigen::Index i = 0; i < sc.demands().rows(); ++i) {
      mix_double(sc.demands()(i, t));
      mix_double(sc.gen_caps()(i, t));
    }
  return h;
}

struct PhaseTimings {
  double build_seconds = 0.0;  // model construction and table assembly
  double solve_seconds = 0.0;  // solver time only
  double total_seconds = 0.0;
};

struct PlacementReport {
  Eigen::VectorXd cost_per_bus;  // NaN for buses not evaluated (budgeted runs)
  BusId best_bus = 0;
  double base_cost = 0.0;
  std::string method;
  std::uint64_t instance = 0;
  bool complete = true;
  PhaseTimings timings;
};

// Lowest-index argmin over the finite entries.
inline BusId argmin_lowest(const Eigen::VectorXd& v) {
  BusId best = 0;
  double value = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::isfinite(v[i]) && v[i] < value) {
      value = v[i];
      best = static_cast<BusId>(i);
    }
  return best;
}

struct EnumerationOptions {
  lp::Options lp;
  unsigned threads = 1;  // 0 = hardware concurrency
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

// Brute-force placement: solve the dispatch LP for every candidate bus.
// With a deadline, buses not reached stay NaN and `complete` is false; the
// bus being solved when time runs out is also abandoned.
inline PlacementReport solve_placement_enumeration(const Grid& grid, const Scenario& sc,
                                                   const EnumerationOptions& options = {}) {
  using clock = std::chrono::steady_clock;
  sc.check_compatible(grid);
  const auto start = clock::now();
  const std::size_t n = grid.bus_count();
  PlacementReport rep;
  rep.method = "oracle";
  rep.base_cost = sc.base_cost();
  rep.instance = instance_hash(grid, sc);
  rep.cost_per_bus = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), std::numeric_limits<double>::quiet_NaN());
  std::vector<double> build(n, 0.0), solve(n, 0.0);
  std::vector<std::exception_ptr> errors(n);

  auto work = [&](BusId b) {
    if (options.deadline && clock::now() >= *options.deadline) return;
    try {
      const auto t0 = clock::now();
      const auto prog = build_dispatch_lp(grid, sc, b);
      const auto t1 = clock::now();
      lp::Options lo = options.lp;
      if (options.deadline) lo.deadline = options.deadline;
      const auto sol = lp::solve_lp(prog, lo);
      const auto t2 = clock::now();
      build[b] = std::chrono::duration<double>(t1 - t0).count();
      solve[b] = std::chrono::duration<double>(t2 - t1).count();
      if (options.deadline && sol.status == lp::Status::IterationLimit) return;
      detail::require_optimal(sol, "dispatch with battery at bus " + std::to_string(b));
      rep.cost_per_bus[static_cast<Eigen::Index>(b)] = sol.objective;
    } catch (...) {
      errors[b] = std::current_exception();
    }
  };

  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (BusId b = 0; b < n; ++b) work(b);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k)
      pool.emplace_back([&] {
        for (std::size_t b = next++; b < n; b = next++) work(b);
      });
    for (auto& th : pool) th.join();
  }
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);

  rep.complete = rep.cost_per_bus.allFinite();
  rep.best_bus = argmin_lowest(rep.cost_per_bus);
  for (std::size_t b = 0; b < n; ++b) {
    rep.timings.build_seconds += build[b];
    rep.timings.solve_seconds += solve[b];
  }
  rep.timings.total_seconds = std::chrono::duration<double>(clock::now() - start).count();
  return rep;
}

}  // namespace batplace
