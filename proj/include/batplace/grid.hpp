#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "batplace/error.hpp"

namespace batplace {

using BusId = std::size_t;
using LineId = std::size_t;

// A transmission line. Flow is positive in the from -> to direction.
struct Line {
  BusId from = 0;
  BusId to = 0;
  double capacity = 1.0;
  double susceptance = 1.0;
};

struct Incidence {
  BusId neighbor;
  LineId line;
};

// Lossless DC network: buses 0..n-1, lines with capacity and susceptance.
// Construction validates connectivity, positivity and the absence of
// self-loops and parallel lines; a Grid is immutable afterwards.
class Grid {
 public:
  Grid(std::size_t bus_count, std::vector<Line> lines, std::string name = {},
       std::vector<std::string> labels = {})
      : bus_count_(bus_count), lines_(std::move(lines)), name_(std::move(name)),
        labels_(std::move(labels)), adjacency_(bus_count) {
    if (bus_count_ == 0) throw Error(ErrorCode::InvalidGrid, "grid needs at least one bus");
    if (labels_.empty()) {
      labels_.reserve(bus_count_);
      for (std::size_t i = 0; i < bus_count_; ++i) labels_.push_back(std::to_string(i));
    }
    if (labels_.size() != bus_count_)
      throw Error(ErrorCode::InvalidGrid, "label count does not match bus count");

    std::set<std::pair<BusId, BusId>> seen;
    for (LineId e = 0; e < lines_.size(); ++e) {
      const Line& l = lines_[e];
      const std::string where = "line " + std::to_string(e);
      if (l.from >= bus_count_ || l.to >= bus_count_)
        throw Error(ErrorCode::InvalidGrid, where + " references a bus outside 0.." +
                                                std::to_string(bus_count_ - 1));
      if (l.from == l.to) throw Error(ErrorCode::InvalidGrid, where + " is a self-loop");
      if (!(l.capacity > 0.0) || !std::isfinite(l.capacity))
        throw Error(ErrorCode::InvalidGrid, where + " has non-positive capacity");
      if (!(l.susceptance > 0.0) || !std::isfinite(l.susceptance))
        throw Error(ErrorCode::InvalidGrid, where + " has non-positive susceptance");
      auto key = std::minmax(l.from, l.to);
      if (!seen.insert(key).second)
        throw Error(ErrorCode::InvalidGrid, where + " is parallel to an earlier line between buses " +
                                                std::to_string(key.first) + " and " +
                                                std::to_string(key.second));
      adjacency_[l.from].push_back({l.to, e});
      adjacency_[l.to].push_back({l.from, e});
    }

    std::vector<char> reached(bus_count_, 0);
    std::queue<BusId> frontier;
    frontier.push(0);
    reached[0] = 1;
    std::size_t count = 1;
    while (!frontier.empty()) {
      BusId u = frontier.front();
      frontier.pop();
      for (const auto& inc : adjacency_[u]) {
        if (!reached[inc.neighbor]) {
          reached[inc.neighbor] = 1;
          ++count;
          frontier.push(inc.neighbor);
        }
      }
    }
    if (count != bus_count_)
      throw Error(ErrorCode::DisconnectedGrid,
                  std::to_string(bus_count_ - count) + " bus(es) unreachable from bus 0");
  }

  std::size_t bus_count() const noexcept { return bus_count_; }
  std::size_t line_count() const noexcept { return lines_.size(); }
  const std::vector<Line>& lines() const noexcept { return lines_; }
  const Line& line(LineId e) const { return lines_.at(e); }
  std::span<const Incidence> incident(BusId bus) const {
    check_bus(bus);
    return adjacency_[bus];
  }
  std::size_t degree(BusId bus) const { return incident(bus).size(); }
  const std::string& name() const noexcept { return name_; }
  const std::string& label(BusId bus) const {
    check_bus(bus);
    return labels_[bus];
  }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  void check_bus(BusId bus) const {
    if (bus >= bus_count_)
      throw Error(ErrorCode::BusOutOfRange, "bus " + std::to_string(bus) + " not in 0.." +
                                                std::to_string(bus_count_ - 1));
  }

  // Same topology with new per-line capacity and susceptance.
  Grid with_line_parameters(std::span<const double> capacity,
                            std::span<const double> susceptance) const {
    if (capacity.size() != lines_.size() || susceptance.size() != lines_.size())
      throw Error(ErrorCode::DimensionMismatch, "line parameter vectors must have one entry per line");
    std::vector<Line> next = lines_;
    for (LineId e = 0; e < next.size(); ++e) {
      next[e].capacity = capacity[e];
      next[e].susceptance = susceptance[e];
    }
    return Grid(bus_count_, std::move(next), name_, labels_);
  }

  Grid with_name(std::string name) const {
    Grid copy = *this;
    copy.name_ = std::move(name);
    return copy;
  }

 private:
  std::size_t bus_count_;
  std::vector<Line> lines_;
  std::string name_;
  std::vector<std::string> labels_;
  std::vector<std::vector<Incidence>> adjacency_;
};

// Horizon T with homogeneous per-period cost c(t), and per-bus demand and
// generation cap matrices (bus x period). Periods are indexed 0..T-1.
class Scenario {
 public:
  Scenario(Eigen::VectorXd cost, Eigen::MatrixXd demand, Eigen::MatrixXd gen_cap)
      : cost_(std::move(cost)), demand_(std::move(demand)), gen_cap_(std::move(gen_cap)) {
    if (cost_.size() == 0) throw Error(ErrorCode::InvalidScenario, "horizon must be positive");
    if (demand_.cols() != cost_.size() || gen_cap_.cols() != cost_.size())
      throw Error(ErrorCode::DimensionMismatch, "demand/gen_cap must have one column per period");
    if (demand_.rows() != gen_cap_.rows() || demand_.rows() == 0)
      throw Error(ErrorCode::DimensionMismatch, "demand and gen_cap must have the same bus count");
    for (Eigen::Index t = 0; t < cost_.size(); ++t)
      if (!(cost_[t] > 0.0) || !std::isfinite(cost_[t]))
        throw Error(ErrorCode::InvalidScenario,
                    "cost at period " + std::to_string(t) + " must be positive and finite");
    for (Eigen::Index i = 0; i < demand_.rows(); ++i)
      for (Eigen::Index t = 0; t < demand_.cols(); ++t) {
        if (!(demand_(i, t) >= 0.0) || !std::isfinite(demand_(i, t)))
          throw Error(ErrorCode::InvalidScenario, "demand at bus " + std::to_string(i) + ", period " +
                                                      std::to_string(t) + " must be non-negative");
        if (!(gen_cap_(i, t) >= 0.0) || !std::isfinite(gen_cap_(i, t)))
          throw Error(ErrorCode::InvalidScenario, "gen_cap at bus " + std::to_string(i) + ", period " +
                                                      std::to_string(t) + " must be non-negative");
      }
  }

  std::size_t horizon() const noexcept { return static_cast<std::size_t>(cost_.size()); }
  std::size_t bus_count() const noexcept { return static_cast<std::size_t>(demand_.rows()); }
  double cost(std::size_t t) const { return cost_[static_cast<Eigen::Index>(t)]; }
  double demand(BusId i, std::size_t t) const {
    return demand_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t));
  }
  double gen_cap(BusId i, std::size_t t) const {
    return gen_cap_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t));
  }
  double surplus(BusId i, std::size_t t) const { return gen_cap(i, t) - demand(i, t); }
  const Eigen::VectorXd& costs() const noexcept { return cost_; }
  const Eigen::MatrixXd& demands() const noexcept { return demand_; }
  const Eigen::MatrixXd& gen_caps() const noexcept { return gen_cap_; }

  // Cost without a battery: sum_t sum_i d_{i,t} c(t).
  double base_cost() const { return (demand_ * cost_).sum(); }

  void check_compatible(const Grid& grid) const {
    if (bus_count() != grid.bus_count())
      throw Error(ErrorCode::DimensionMismatch,
                  "scenario has " + std::to_string(bus_count()) + " buses, grid has " +
                      std::to_string(grid.bus_count()));
  }

  Scenario with_costs(Eigen::VectorXd cost) const { return Scenario(std::move(cost), demand_, gen_cap_); }
  Scenario with_gen_caps(Eigen::MatrixXd gen_cap) const {
    return Scenario(cost_, demand_, std::move(gen_cap));
  }

 private:
  Eigen::VectorXd cost_;
  Eigen::MatrixXd demand_;
  Eigen::MatrixXd gen_cap_;
};

enum class IncidenceWeighting { Susceptance, Unit };

// m x n incidence matrix: row e has +w at `from`, -w at `to`.
inline Eigen::MatrixXd build_incidence(const Grid& grid,
                                       IncidenceWeighting weighting = IncidenceWeighting::Susceptance) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.line_count()),
                                            static_cast<Eigen::Index>(grid.bus_count()));
  for (LineId e = 0; e < grid.line_count(); ++e) {
    const Line& l = grid.line(e);
    const double w = weighting == IncidenceWeighting::Susceptance ? l.susceptance : 1.0;
    a(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(l.from)) = w;
    a(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(l.to)) = -w;
  }
  return a;
}

// Susceptance-weighted Laplacian.
inline Eigen::MatrixXd build_admittance(const Grid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.bus_count());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (const Line& l : grid.lines()) {
    const auto i = static_cast<Eigen::Index>(l.from);
    const auto j = static_cast<Eigen::Index>(l.to);
    b(i, i) += l.susceptance;
    b(j, j) += l.susceptance;
    b(i, j) -= l.susceptance;
    b(j, i) -= l.susceptance;
  }
  return b;
}

// Sum of capacities of the lines incident to `bus`.
inline double weighted_degree(const Grid& grid, BusId bus) {
  double total = 0.0;
  for (const auto& inc : grid.incident(bus)) total += grid.line(inc.line).capacity;
  return total;
}

}  // namespace batplace
