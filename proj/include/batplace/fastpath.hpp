#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "batplace/assumptions.hpp"
#include "batplace/grid.hpp"
#include "batplace/oracle.hpp"
#include "batplace/schedule.hpp"
#include "batplace/simplex.hpp"
#include "batplace/topology.hpp"

namespace batplace {

namespace detail {

inline void require(const AssumptionCheck& check, const char* name) {
  if (!check.holds) throw Error(ErrorCode::PreconditionViolated, std::string(name) + " violated: " + check.first_violation);
}

inline void require_topology(const Grid& grid, bool allow_cycles) {
  const Topology topo = classify_topology(grid);
  if (topo == Topology::General || (!allow_cycles && topo != Topology::Tree))
    throw Error(ErrorCode::UnsupportedTopology,
                "topology is " + std::string(to_string(topo)) + ", need " + (allow_cycles ? "tree or weakly-cyclic" : "tree"));
}

inline Eigen::VectorXd constant_per_period(const Scenario& sc, double value) {
  return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(sc.horizon()), value);
}

}  // namespace detail

// Maximum outflow on a tree: every neighbour can absorb a full line.
inline Eigen::VectorXd tree_outflow(const Grid& grid, const Scenario& sc, BusId b) {
  grid.check_bus(b);
  detail::require_topology(grid, false);
  detail::require(validate_assumptions(grid, sc).limited_transmission, kAssumptionNames[2]);
  return detail::constant_per_period(sc, weighted_degree(grid, b));
}

inline Eigen::VectorXd weakly_cyclic_outflow(const Grid& grid, const Scenario& sc, BusId b) {
  grid.check_bus(b);
  detail::require_topology(grid, true);
  const auto rep = validate_assumptions(grid, sc);
  detail::require(rep.limited_transmission, kAssumptionNames[2]);
  detail::require(rep.unit_admittance, kAssumptionNames[4]);
  detail::require(rep.uniform_capacity, kAssumptionNames[5]);
  return detail::constant_per_period(sc, static_cast<double>(grid.degree(b)) * grid.line(0).capacity);
}

// Inputs of the ring-link subproblem. The ring runs v -> path[0] -> ... ->
// path[k-1] -> v; capacity[i] belongs to the i-th edge of that walk, so it
// has k+1 entries.
struct RingSubproblem {
  BusId anchor = 0;
  std::vector<BusId> path;
  std::vector<double> supply;    // upper bound on net injection per ring bus
  std::vector<double> demand;    // net injection >= -demand
  std::vector<double> capacity;  // per ring edge, k+1 entries
};

// Maximum power the ring delivers into its anchor under unit admittance.
// Variables: edge flows phi_0..phi_k along the walk and bus injections q_i;
// q_i = phi_i - phi_{i-1}, sum(phi) = 0 (loop law), maximize phi_k - phi_0.
inline double ring_mif(const RingSubproblem& sub, const lp::Options& options = {}) {
  const auto k = static_cast<Eigen::Index>(sub.path.size());
  if (k < 1 || static_cast<Eigen::Index>(sub.supply.size()) != k ||
      static_cast<Eigen::Index>(sub.demand.size()) != k || static_cast<Eigen::Index>(sub.capacity.size()) != k + 1)
    throw Error(ErrorCode::DimensionMismatch, "ring subproblem needs k buses and k+1 edge capacities");
  const Eigen::Index edges = k + 1;
  auto prog = lp::LinearProgram::with_shape(k + 1, edges + k);
  for (Eigen::Index e = 0; e < edges; ++e) {
    prog.lower[e] = -sub.capacity[static_cast<std::size_t>(e)];
    prog.upper[e] = sub.capacity[static_cast<std::size_t>(e)];
    prog.equality(k, e) = 1.0;
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index q = edges + i;
    prog.lower[q] = -sub.demand[static_cast<std::size_t>(i)];
    prog.upper[q] = sub.supply[static_cast<std::size_t>(i)];
    // bus path[i] sits between edge i (inbound) and edge i+1 (outbound)
    prog.equality(i, q) = 1.0;
    prog.equality(i, i + 1) = -1.0;
    prog.equality(i, i) = 1.0;
  }
  prog.objective[0] = 1.0;
  prog.objective[edges - 1] = -1.0;
  const auto sol = lp::solve_lp(prog, options);
  detail::require_optimal(sol, "ring subproblem at bus " + std::to_string(sub.anchor));
  return -sol.objective;
}

// F^re-in[v][component]: per-period inflow a component of G - v can push
// into v. Filled lazily; an empty vector means unset.
class ReInflowMemo {
 public:
  ReInflowMemo() = default;
  explicit ReInflowMemo(const Grid& grid) : decomposition_(grid.bus_count()), values_(grid.bus_count()) {
    for (BusId v = 0; v < grid.bus_count(); ++v) {
      decomposition_[v] = components_after_removal(grid, v);
      values_[v].assign(decomposition_[v].components.size(), Eigen::VectorXd());
    }
  }

  const ComponentDecomposition& decomposition(BusId v) const { return decomposition_[v]; }
  bool has(BusId v, std::size_t c) const { return values_[v][c].size() > 0; }
  const Eigen::VectorXd& get(BusId v, std::size_t c) const { return values_[v][c]; }
  void set(BusId v, std::size_t c, Eigen::VectorXd value) {
    if (has(v, c)) throw Error(ErrorCode::NumericalFailure, "re-inflow memo entry written twice");
    values_[v][c] = std::move(value);
  }
  std::size_t filled() const {
    std::size_t count = 0;
    for (const auto& row : values_)
      for (const auto& entry : row) count += entry.size() > 0;
    return count;
  }

 private:
  std::vector<ComponentDecomposition> decomposition_;
  std::vector<std::vector<Eigen::VectorXd>> values_;
};

namespace detail {

class InflowRecursion {
 public:
  InflowRecursion(const Grid& grid, const Scenario& sc, ReInflowMemo& memo, const lp::Options& options)
      : grid_(grid), sc_(sc), memo_(memo), options_(options) {}

  // MIF(v, C) for every period.
  const Eigen::VectorXd& mif(BusId v, std::size_t c) {
    if (memo_.has(v, c)) return memo_.get(v, c);
    const RemovalComponent& comp = memo_.decomposition(v).components[c];
    Eigen::VectorXd value;
    if (comp.kind == LinkKind::TreeLike) {
      const LineId e = comp.connecting_lines.front();
      const BusId p = other_end(e, v);
      value = supply(p, v).cwiseMin(grid_.line(e).capacity);
    } else if (comp.kind == LinkKind::RingLike) {
      value = ring(v, comp);
    } else {
      throw Error(ErrorCode::UnsupportedTopology,
                  "component of G - " + std::to_string(v) + " attaches through " +
                      std::to_string(comp.connecting_lines.size()) + " lines");
    }
    memo_.set(v, c, std::move(value));
    return memo_.get(v, c);
  }

  Eigen::VectorXd inflow(BusId v) {
    Eigen::VectorXd total = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sc_.horizon()));
    for (std::size_t c = 0; c < memo_.decomposition(v).components.size(); ++c) total += mif(v, c);
    return total;
  }

 private:
  BusId other_end(LineId e, BusId v) const {
    const Line& l = grid_.line(e);
    return l.from == v ? l.to : l.from;
  }

  Eigen::VectorXd surplus(BusId p) const {
    return (sc_.gen_caps().row(static_cast<Eigen::Index>(p)) - sc_.demands().row(static_cast<Eigen::Index>(p))).transpose();
  }

  // Own surplus of p plus the re-inflow of every component of G - p that
  // does not contain `upstream`.
  Eigen::VectorXd supply(BusId p, BusId upstream) {
    Eigen::VectorXd s = surplus(p);
    const auto& dec = memo_.decomposition(p);
    const int skip = dec.component_of[upstream];
    for (std::size_t c = 0; c < dec.components.size(); ++c)
      if (static_cast<int>(c) != skip) s += mif(p, c);
    return s;
  }

  // Bus path inside the component from one attachment point to the other.
  std::vector<BusId> ring_path(BusId v, const RemovalComponent& comp) const {
    const BusId start = other_end(comp.connecting_lines[0], v);
    const BusId goal = other_end(comp.connecting_lines[1], v);
    std::vector<BusId> parent(grid_.bus_count(), grid_.bus_count());
    std::queue<BusId> q;
    q.push(start);
    parent[start] = start;
    while (!q.empty() && parent[goal] == grid_.bus_count()) {
      const BusId u = q.front();
      q.pop();
      for (const auto& inc : grid_.incident(u)) {
        if (inc.neighbor == v || parent[inc.neighbor] != grid_.bus_count()) continue;
        parent[inc.neighbor] = u;
        q.push(inc.neighbor);
      }
    }
    std::vector<BusId> path{goal};
    while (path.back() != start) path.push_back(parent[path.back()]);
    std::reverse(path.begin(), path.end());
    return path;
  }

  LineId line_between(BusId a, BusId b) const {
    for (const auto& inc : grid_.incident(a))
      if (inc.neighbor == b) return inc.line;
    throw Error(ErrorCode::InvalidGrid, "no line between consecutive ring buses");
  }

  Eigen::VectorXd ring(BusId v, const RemovalComponent& comp) {
    RingSubproblem sub;
    sub.anchor = v;
    sub.path = ring_path(v, comp);
    const std::size_t k = sub.path.size();
    sub.capacity.push_back(grid_.line(comp.connecting_lines[0]).capacity);
    for (std::size_t i = 0; i + 1 < k; ++i)
      sub.capacity.push_back(grid_.line(line_between(sub.path[i], sub.path[i + 1])).capacity);
    sub.capacity.push_back(grid_.line(comp.connecting_lines[1]).capacity);

    // Off-ring supply: components of G - p_i away from v. The component of
    // G - p_i containing v also holds the rest of the ring.
    std::vector<Eigen::VectorXd> supplies;
    supplies.reserve(k);
    for (BusId p : sub.path) supplies.push_back(supply(p, v));

    const std::size_t horizon = sc_.horizon();
    Eigen::VectorXd value(static_cast<Eigen::Index>(horizon));
    sub.supply.resize(k);
    sub.demand.resize(k);
    for (std::size_t t = 0; t < horizon; ++t) {
      for (std::size_t i = 0; i < k; ++i) {
        sub.supply[i] = supplies[i][static_cast<Eigen::Index>(t)];
        sub.demand[i] = sc_.demand(sub.path[i], t);
      }
      value[static_cast<Eigen::Index>(t)] = ring_mif(sub, options_);
    }
    return value;
  }

  const Grid& grid_;
  const Scenario& sc_;
  ReInflowMemo& memo_;
  lp::Options options_;
};

}  // namespace detail

// Recursive inflows without precondition checks (the benchmark also runs it on
// instances outside its guarantee, e.g. random admittance). Components with
// more than two attaching lines raise UnsupportedTopology.
inline Eigen::MatrixXd algorithm1_inflows_unchecked(const Grid& grid, const Scenario& sc, ReInflowMemo* memo = nullptr,
                                                    const lp::Options& options = {}) {
  sc.check_compatible(grid);
  ReInflowMemo local;
  if (!memo) {
    local = ReInflowMemo(grid);
    memo = &local;
  }
  detail::InflowRecursion rec(grid, sc, *memo, options);
  Eigen::MatrixXd in(static_cast<Eigen::Index>(grid.bus_count()), static_cast<Eigen::Index>(sc.horizon()));
  for (BusId v = 0; v < grid.bus_count(); ++v) in.row(static_cast<Eigen::Index>(v)) = rec.inflow(v).transpose();
  return in;
}

// Weakly-cyclic maximum inflow for all buses and periods. Trees waive unit
// admittance and uniform capacity.
inline MaxflowTable algorithm1_inflows(const Grid& grid, const Scenario& sc, ReInflowMemo* memo = nullptr) {
  const Topology topo = classify_topology(grid);
  if (topo == Topology::General)
    throw Error(ErrorCode::UnsupportedTopology, "inflow recursion needs a tree or weakly-cyclic grid");
  const auto rep = validate_assumptions(grid, sc);
  detail::require(rep.sufficient_generation, kAssumptionNames[1]);
  detail::require(rep.limited_transmission, kAssumptionNames[2]);
  if (topo != Topology::Tree) {
    detail::require(rep.unit_admittance, kAssumptionNames[4]);
    detail::require(rep.uniform_capacity, kAssumptionNames[5]);
  }
  auto tab = MaxflowTable::sized(grid.bus_count(), sc.horizon(), FlowSource::Recursive);
  tab.inflow = algorithm1_inflows_unchecked(grid, sc, memo);
  for (BusId b = 0; b < grid.bus_count(); ++b)
    for (std::size_t t = 0; t < sc.horizon(); ++t) tab.outflow_source[b * sc.horizon() + t] = FlowSource::ClosedForm;
  for (BusId b = 0; b < grid.bus_count(); ++b)
    tab.outflow.row(static_cast<Eigen::Index>(b)).setConstant(weighted_degree(grid, b));
  return tab;
}

// Tree inflow at one bus and period via the edge-by-edge recursion.
inline double tree_inflow(const Grid& grid, const Scenario& sc, BusId b, std::size_t t) {
  grid.check_bus(b);
  detail::require_topology(grid, false);
  detail::require(validate_assumptions(grid, sc).sufficient_generation, kAssumptionNames[1]);
  if (t >= sc.horizon()) throw Error(ErrorCode::DimensionMismatch, "period beyond horizon");
  ReInflowMemo memo(grid);
  detail::InflowRecursion rec(grid, sc, memo, {});
  return rec.inflow(b)[static_cast<Eigen::Index>(t)];
}

struct CongestionCheck {
  bool uncongested = false;
  std::optional<double> uniform_cost;
  BusId probe_bus = 0;
  double max_loading = 0.0;  // max |flow| / capacity seen
};

// Solves one dispatch (battery at `probe`) and reports whether every line
// stayed strictly below its limit in every period.
inline CongestionCheck check_no_congestion_regime(const Grid& grid, const Scenario& sc, BusId probe = 0,
                                                  double tolerance = 1e-7) {
  const auto sol = solve_dispatch(grid, sc, probe);
  CongestionCheck out;
  out.probe_bus = probe;
  out.uncongested = true;
  for (LineId e = 0; e < grid.line_count(); ++e) {
    const double cap = grid.line(e).capacity;
    for (Eigen::Index t = 0; t < sol.flow.cols(); ++t) {
      const double f = std::abs(sol.flow(static_cast<Eigen::Index>(e), t));
      out.max_loading = std::max(out.max_loading, f / cap);
      if (f >= cap - tolerance) out.uncongested = false;
    }
  }
  if (out.uncongested) out.uniform_cost = sol.cost;
  return out;
}

// Whether the weighted-degree flow result applies: limited transmission and
// large generation, plus either equal capacities, a tree, or the two
// capacity-spread inequalities in the maximum degree D (only for D > 2).
inline bool check_closed_form_conditions(const Grid& grid, const Scenario& sc) {
  const auto rep = validate_assumptions(grid, sc);
  if (!rep.limited_transmission.holds || !rep.large_generation.holds) return false;
  if (rep.uniform_capacity.holds) return true;
  if (classify_topology(grid) == Topology::Tree) return true;
  std::size_t degree = 0;
  for (BusId i = 0; i < grid.bus_count(); ++i) degree = std::max(degree, grid.degree(i));
  if (degree <= 2) return false;
  double fmax = 0.0, fmin = std::numeric_limits<double>::infinity();
  for (const Line& l : grid.lines()) {
    fmax = std::max(fmax, l.capacity);
    fmin = std::min(fmin, l.capacity);
  }
  const double dmin = sc.demands().minCoeff();
  const double dd = static_cast<double>(degree);
  const bool spread = (dd - 1.0) / (dd - 2.0) * fmax - fmin <= dmin / (dd - 2.0);
  const bool ratio = fmax / fmin <= std::min(2.0, dd / (dd - 2.0));
  return spread && ratio;
}

// Inflow and outflow both equal the weighted degree, every period.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> weighted_degree_flows(const Grid& grid, const Scenario& sc, BusId b) {
  grid.check_bus(b);
  const auto rep = validate_assumptions(grid, sc);
  detail::require(rep.limited_transmission, kAssumptionNames[2]);
  detail::require(rep.large_generation, kAssumptionNames[3]);
  detail::require(rep.unit_admittance, kAssumptionNames[4]);
  if (!check_closed_form_conditions(grid, sc))
    throw Error(ErrorCode::PreconditionViolated, "line capacities spread too widely for the weighted-degree result");
  const auto w = detail::constant_per_period(sc, weighted_degree(grid, b));
  return {w, w};
}

namespace detail {
// Subtree surplus sums S_j for each neighbour j of b in a tree, per period.
inline std::vector<Eigen::VectorXd> subtree_surpluses(const Grid& grid, const Scenario& sc, BusId b) {
  const SpanningTree tree = bfs_spanning_tree(grid, b);
  const auto horizon = static_cast<Eigen::Index>(sc.horizon());
  std::vector<Eigen::VectorXd> acc(grid.bus_count(), Eigen::VectorXd::Zero(horizon));
  for (auto it = tree.order.rbegin(); it != tree.order.rend(); ++it) {
    const BusId v = *it;
    acc[v] += (sc.gen_caps().row(static_cast<Eigen::Index>(v)) - sc.demands().row(static_cast<Eigen::Index>(v))).transpose();
    if (v != b) acc[tree.parent[v]] += acc[v];
  }
  std::vector<Eigen::VectorXd> out;
  for (const auto& inc : grid.incident(b)) out.push_back(acc[inc.neighbor]);
  return out;
}
}  // namespace detail

// Closed-form tree cost with the battery at b, from the subtree surplus sums.
inline double tree_cost_formula(const Grid& grid, const Scenario& sc, BusId b) {
  grid.check_bus(b);
  detail::require_topology(grid, false);
  const auto rep = validate_assumptions(grid, sc);
  detail::require(rep.limited_transmission, kAssumptionNames[2]);
  detail::require(rep.uniform_capacity, kAssumptionNames[5]);
  const double f = grid.line(0).capacity;
  const double degree = static_cast<double>(grid.degree(b));
  const auto sums = detail::subtree_surpluses(grid, sc, b);

  auto tab = MaxflowTable::sized(grid.bus_count(), sc.horizon(), FlowSource::ClosedForm);
  for (std::size_t t = 0; t < sc.horizon(); ++t) {
    double in = 0.0;
    for (const auto& s : sums) in += std::min(s[static_cast<Eigen::Index>(t)], f);
    tab.inflow(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(t)) = in;
    tab.outflow(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(t)) = degree * f;
  }
  const std::size_t k = adjustment_period(tab, sc, b);
  const double ck = sc.cost(sort_periods(sc)[k - 1]);

  double cost = sc.base_cost();
  for (std::size_t t = 0; t < sc.horizon(); ++t) {
    const double diff = ck - sc.cost(t);
    const double pos = std::max(diff, 0.0);
    cost += sc.demand(b, t) * diff;
    cost -= sc.gen_cap(b, t) * pos;
    cost -= degree * f * std::abs(diff);
    for (const auto& s : sums) cost += std::max(f - s[static_cast<Eigen::Index>(t)], 0.0) * pos;
  }
  return cost;
}

}  // namespace batplace
