#pragma once

#include <chrono>
#include <string>

#include <Eigen/Dense>

#include "batplace/fastpath.hpp"
#include "batplace/oracle.hpp"
#include "batplace/schedule.hpp"
#include "batplace/topology.hpp"

namespace batplace {

enum class InflowBackend { LpOracle, FastPath };

inline std::string_view to_string(InflowBackend b) { return b == InflowBackend::LpOracle ? "maxflow-lp" : "fast"; }

// Inflow/outflow table of the fast method: recursive inflows, weighted-degree
// outflows. Only topology is enforced here.
inline MaxflowTable fast_maxflow_table(const Grid& grid, const Scenario& sc, ReInflowMemo* memo = nullptr) {
  if (classify_topology(grid) == Topology::General)
    throw Error(ErrorCode::UnsupportedTopology, "fast path needs a tree or weakly-cyclic grid");
  auto tab = MaxflowTable::sized(grid.bus_count(), sc.horizon(), FlowSource::Recursive);
  tab.inflow = algorithm1_inflows_unchecked(grid, sc, memo);
  for (BusId b = 0; b < grid.bus_count(); ++b) {
    tab.outflow.row(static_cast<Eigen::Index>(b)).setConstant(weighted_degree(grid, b));
    for (std::size_t t = 0; t < sc.horizon(); ++t) tab.outflow_source[b * sc.horizon() + t] = FlowSource::ClosedForm;
  }
  return tab;
}

inline PlacementReport placement_from_table(const MaxflowTable& tab, const Scenario& sc, std::string method) {
  PlacementReport rep;
  rep.method = std::move(method);
  rep.base_cost = sc.base_cost();
  rep.cost_per_bus.resize(static_cast<Eigen::Index>(tab.bus_count()));
  for (BusId b = 0; b < tab.bus_count(); ++b) rep.cost_per_bus[static_cast<Eigen::Index>(b)] = analytic_cost(tab, sc, b);
  rep.best_bus = argmin_lowest(rep.cost_per_bus);
  return rep;
}

// Per-bus optimal cost through the inflow/outflow decomposition.
inline PlacementReport evaluate_placement(const Grid& grid, const Scenario& sc, InflowBackend backend) {
  using clock = std::chrono::steady_clock;
  sc.check_compatible(grid);
  const auto t0 = clock::now();
  const MaxflowTable tab =
      backend == InflowBackend::LpOracle ? maxflow_table_lp(grid, sc) : fast_maxflow_table(grid, sc);
  const auto t1 = clock::now();
  PlacementReport rep = placement_from_table(tab, sc, std::string(to_string(backend)));
  const auto t2 = clock::now();
  rep.instance = instance_hash(grid, sc);
  rep.timings.solve_seconds = std::chrono::duration<double>(t1 - t0).count();
  rep.timings.build_seconds = std::chrono::duration<double>(t2 - t1).count();
  rep.timings.total_seconds = std::chrono::duration<double>(t2 - t0).count();
  return rep;
}

}  // namespace batplace
