#pragma once

#include <vector>

#include "batplace/grid.hpp"

namespace batplace::test_support {

inline Grid p2(double capacity = 1.0, double susceptance = 1.0) {
  return Grid(2, {{0, 1, capacity, susceptance}}, "P2");
}

inline Grid s4() { return Grid(4, {{0, 1, 1.0, 1.0}, {0, 2, 1.0, 1.0}, {0, 3, 1.0, 1.0}}, "S4"); }

inline Grid tri3(double f01 = 1.0, double f12 = 1.0, double f02 = 1.0) {
  return Grid(3, {{0, 1, f01, 1.0}, {1, 2, f12, 1.0}, {0, 2, f02, 1.0}}, "TRI3");
}

// Triangle 0-1-2 with a pendant leaf 3 hanging off bus 0.
inline Grid tri3_leaf() {
  return Grid(4, {{0, 1, 1.0, 1.0}, {1, 2, 1.0, 1.0}, {0, 2, 1.0, 1.0}, {0, 3, 1.0, 1.0}}, "TRI3+leaf");
}

inline Grid k4() {
  return Grid(4, {{0, 1, 1, 1}, {0, 2, 1, 1}, {0, 3, 1, 1}, {1, 2, 1, 1}, {1, 3, 1, 1}, {2, 3, 1, 1}}, "K4");
}

inline Grid path(std::size_t n, double capacity = 1.0) {
  std::vector<Line> lines;
  for (BusId i = 0; i + 1 < n; ++i) lines.push_back({i, i + 1, capacity, 1.0});
  return Grid(n, lines, "path");
}

inline Grid ring(std::size_t n) {
  std::vector<Line> lines;
  for (BusId i = 0; i < n; ++i) lines.push_back({i, (i + 1) % n, 1.0, 1.0});
  return Grid(n, lines, "ring");
}

// SC-A: T=2, c=(1,2), d=2 and gen_cap=3.2 everywhere.
inline Scenario sc_a(std::size_t n, double gen_cap = 3.2, Eigen::VectorXd cost = Eigen::Vector2d(1.0, 2.0)) {
  const auto rows = static_cast<Eigen::Index>(n);
  return Scenario(cost, Eigen::MatrixXd::Constant(rows, cost.size(), 2.0),
                  Eigen::MatrixXd::Constant(rows, cost.size(), gen_cap));
}

// Per-bus surplus on top of demand 2, constant over `horizon` periods.
inline Scenario with_surplus(const std::vector<double>& surplus, std::size_t horizon = 2) {
  const auto n = static_cast<Eigen::Index>(surplus.size());
  const auto t = static_cast<Eigen::Index>(horizon);
  Eigen::VectorXd cost(t);
  for (Eigen::Index k = 0; k < t; ++k) cost[k] = 1.0 + static_cast<double>(k);
  Eigen::MatrixXd demand = Eigen::MatrixXd::Constant(n, t, 2.0);
  Eigen::MatrixXd cap = demand;
  for (Eigen::Index i = 0; i < n; ++i) cap.row(i).array() += surplus[static_cast<std::size_t>(i)];
  return Scenario(cost, demand, cap);
}

}  // namespace batplace::test_support
