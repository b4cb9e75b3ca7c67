#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "batplace/grid.hpp"
#include "batplace/oracle.hpp"

namespace batplace {

enum class FlowSource { LpOracle, ClosedForm, Recursive };

inline std::string_view to_string(FlowSource s) {
  switch (s) {
    case FlowSource::LpOracle: return "lp-oracle";
    case FlowSource::ClosedForm: return "closed-form";
    case FlowSource::Recursive: return "recursive";
  }
  return "unknown";
}

// Per-bus, per-period maximum inflow and outflow (n x T), each entry tagged
// with how it was obtained.
struct MaxflowTable {
  Eigen::MatrixXd inflow;
  Eigen::MatrixXd outflow;
  std::vector<FlowSource> inflow_source;   // row-major n x T
  std::vector<FlowSource> outflow_source;

  static MaxflowTable sized(std::size_t n, std::size_t horizon, FlowSource source) {
    MaxflowTable tab;
    const auto rows = static_cast<Eigen::Index>(n);
    const auto cols = static_cast<Eigen::Index>(horizon);
    tab.inflow = Eigen::MatrixXd::Zero(rows, cols);
    tab.outflow = Eigen::MatrixXd::Zero(rows, cols);
    tab.inflow_source.assign(n * horizon, source);
    tab.outflow_source.assign(n * horizon, source);
    return tab;
  }

  std::size_t bus_count() const { return static_cast<std::size_t>(inflow.rows()); }
  std::size_t horizon() const { return static_cast<std::size_t>(inflow.cols()); }
  double in(BusId b, std::size_t t) const { return inflow(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(t)); }
  double out(BusId b, std::size_t t) const { return outflow(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(t)); }
  FlowSource in_source(BusId b, std::size_t t) const { return inflow_source[b * horizon() + t]; }
  FlowSource out_source(BusId b, std::size_t t) const { return outflow_source[b * horizon() + t]; }
};

// Oracle-sourced table: two small LPs per (bus, period).
inline MaxflowTable maxflow_table_lp(const Grid& grid, const Scenario& sc, const lp::Options& options = {}) {
  sc.check_compatible(grid);
  auto tab = MaxflowTable::sized(grid.bus_count(), sc.horizon(), FlowSource::LpOracle);
  for (BusId b = 0; b < grid.bus_count(); ++b)
    for (std::size_t t = 0; t < sc.horizon(); ++t) {
      const auto i = static_cast<Eigen::Index>(b);
      const auto c = static_cast<Eigen::Index>(t);
      tab.inflow(i, c) = solve_maxflow_lp(grid, sc, b, t, Direction::In, options);
      tab.outflow(i, c) = solve_maxflow_lp(grid, sc, b, t, Direction::Out, options);
    }
  return tab;
}

// Period indices (0-based) by ascending cost, ties by ascending index.
inline std::vector<std::size_t> sort_periods(const Scenario& sc) {
  std::vector<std::size_t> order(sc.horizon());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&sc](std::size_t a, std::size_t b) { return sc.cost(a) < sc.cost(b); });
  return order;
}

namespace detail {
inline void check_table(const MaxflowTable& tab, const Scenario& sc, BusId b) {
  if (tab.horizon() != sc.horizon() || tab.bus_count() != sc.bus_count())
    throw Error(ErrorCode::DimensionMismatch, "maxflow table shape does not match the scenario");
  if (b >= tab.bus_count())
    throw Error(ErrorCode::BusOutOfRange, "bus " + std::to_string(b) + " not in 0.." + std::to_string(tab.bus_count() - 1));
}
}  // namespace detail

// 1-based rank k of the adjustment period: the first k whose cumulative
// charging room over the k cheapest periods covers the discharge room of the
// remaining ones plus the battery bus's total demand. Falls back to T.
inline std::size_t adjustment_period(const MaxflowTable& tab, const Scenario& sc, BusId b) {
  detail::check_table(tab, sc, b);
  const auto order = sort_periods(sc);
  const std::size_t horizon = sc.horizon();
  double own_demand = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) own_demand += sc.demand(b, t);
  // suffix[k] = sum of F_out over sorted ranks k+1..T (0-based k..T-1)
  std::vector<double> suffix(horizon + 1, 0.0);
  for (std::size_t r = horizon; r-- > 0;) suffix[r] = suffix[r + 1] + tab.out(b, order[r]);
  double charge = 0.0;
  for (std::size_t k = 1; k <= horizon; ++k) {
    const std::size_t t = order[k - 1];
    charge += sc.gen_cap(b, t) + tab.in(b, t);
    if (charge >= suffix[k] + own_demand) return k;
  }
  return horizon;
}

struct ChargeSchedule {
  BusId battery = 0;
  std::vector<std::size_t> order;  // 0-based periods by ascending cost
  std::size_t k = 1;               // 1-based rank of the adjustment period
  Eigen::VectorXd control;         // u_{b,t}, > 0 discharges
  double initial_soc = 0.0;

  std::size_t adjustment() const { return order[k - 1]; }
};

// Full charge before the adjustment period, full discharge after, and the
// balancing value at the adjustment period itself.
inline ChargeSchedule bang_bang_profile(const MaxflowTable& tab, const Scenario& sc, BusId b, std::size_t k) {
  detail::check_table(tab, sc, b);
  const std::size_t horizon = sc.horizon();
  if (k < 1 || k > horizon) throw Error(ErrorCode::DimensionMismatch, "adjustment rank out of 1..T");
  ChargeSchedule s;
  s.battery = b;
  s.order = sort_periods(sc);
  s.k = k;
  s.control = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(horizon));
  double rest = 0.0;
  for (std::size_t r = 0; r < horizon; ++r) {
    if (r + 1 == k) continue;
    const std::size_t t = s.order[r];
    const double u = r + 1 < k ? -tab.in(b, t) - sc.gen_cap(b, t) + sc.demand(b, t) : tab.out(b, t) + sc.demand(b, t);
    s.control[static_cast<Eigen::Index>(t)] = u;
    rest += u;
  }
  const std::size_t tk = s.adjustment();
  const double lo = -tab.in(b, tk) - sc.gen_cap(b, tk) + sc.demand(b, tk);
  const double hi = tab.out(b, tk) + sc.demand(b, tk);
  const double uk = -rest;
  const double slack = 1e-9 * std::max({1.0, std::abs(lo), std::abs(hi)});
  // the interval is half-open at the top except when k = T, where the
  // fallback rank may land exactly on full discharge
  const bool above = k == horizon ? uk > hi + slack : uk >= hi + slack;
  if (uk < lo - slack || above)
    throw Error(ErrorCode::BalanceOutOfRange, "adjustment control " + std::to_string(uk) + " outside [" +
                                                  std::to_string(lo) + ", " + std::to_string(hi) + ")");
  s.control[static_cast<Eigen::Index>(tk)] = uk;
  s.initial_soc = recover_initial_soc(s.control);
  return s;
}

// Optimal cost with the battery at b given its inflow/outflow table.
inline double analytic_cost(const MaxflowTable& tab, const Scenario& sc, BusId b) {
  const std::size_t k = adjustment_period(tab, sc, b);
  const auto order = sort_periods(sc);
  const double ck = sc.cost(order[k - 1]);
  double cost = sc.base_cost();
  for (std::size_t t = 0; t < sc.horizon(); ++t) {
    const double diff = ck - sc.cost(t);
    if (diff > 0.0) cost -= (tab.in(b, t) + sc.gen_cap(b, t) - sc.demand(b, t)) * diff;
    if (diff < 0.0) cost -= (tab.out(b, t) + sc.demand(b, t)) * (-diff);
  }
  return cost;
}

}  // namespace batplace
