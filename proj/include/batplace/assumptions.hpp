#pragma once

#include <array>
#include <cmath>
#include <sstream>
#include <string>

#include "batplace/grid.hpp"

namespace batplace {

struct AssumptionCheck {
  bool holds = true;
  std::string first_violation;  // empty when the check holds
};

// Modeling assumptions A1..A6:
//   A1 distinct per-period costs          A4 large generation (g >= f + d at neighbours)
//   A2 sufficient generation (g > d)      A5 unit admittance
//   A3 limited transmission (f < d)       A6 uniform line capacity
struct AssumptionReport {
  AssumptionCheck distinct_costs;
  AssumptionCheck sufficient_generation;
  AssumptionCheck limited_transmission;
  AssumptionCheck large_generation;
  AssumptionCheck unit_admittance;
  AssumptionCheck uniform_capacity;

  std::array<const AssumptionCheck*, 6> checks() const {
    return {&distinct_costs, &sufficient_generation, &limited_transmission,
            &large_generation, &unit_admittance,     &uniform_capacity};
  }

  bool all() const {
    for (const auto* c : checks())
      if (!c->holds) return false;
    return true;
  }

  // "A1..A6" as a string of '1'/'0'.
  std::string flags() const {
    std::string s;
    for (const auto* c : checks()) s.push_back(c->holds ? '1' : '0');
    return s;
  }
};

inline constexpr std::array<const char*, 6> kAssumptionNames = {
    "A1 distinct costs",    "A2 sufficient generation", "A3 limited transmission",
    "A4 large generation",  "A5 unit admittance",       "A6 uniform capacity"};

namespace detail {
inline void fail_once(AssumptionCheck& check, const std::string& what) {
  if (!check.holds) return;
  check.holds = false;
  check.first_violation = what;
}

inline std::string at(const std::string& kind, std::size_t index) { return kind + " " + std::to_string(index); }
}  // namespace detail

inline AssumptionReport validate_assumptions(const Grid& grid, const Scenario& scenario) {
  scenario.check_compatible(grid);
  AssumptionReport r;
  const std::size_t n = grid.bus_count();
  const std::size_t horizon = scenario.horizon();

  for (std::size_t t = 1; t < horizon && r.distinct_costs.holds; ++t)
    for (std::size_t s = 0; s < t; ++s)
      if (scenario.cost(s) == scenario.cost(t)) {
        detail::fail_once(r.distinct_costs, "period " + std::to_string(t) + " repeats the cost of period " +
                                                std::to_string(s));
        break;
      }

  for (BusId i = 0; i < n; ++i)
    for (std::size_t t = 0; t < horizon; ++t)
      if (!(scenario.gen_cap(i, t) > scenario.demand(i, t)))
        detail::fail_once(r.sufficient_generation,
                          detail::at("bus", i) + ", period " + std::to_string(t) + ": gen_cap <= demand");

  for (LineId e = 0; e < grid.line_count(); ++e) {
    const Line& l = grid.line(e);
    for (std::size_t t = 0; t < horizon; ++t) {
      if (!(l.capacity < std::min(scenario.demand(l.from, t), scenario.demand(l.to, t))))
        detail::fail_once(r.limited_transmission, detail::at("line", e) + ", period " + std::to_string(t) +
                                                      ": capacity >= endpoint demand");
      if (!(scenario.gen_cap(l.to, t) >= l.capacity + scenario.demand(l.to, t)))
        detail::fail_once(r.large_generation, detail::at("line", e) + ", bus " + std::to_string(l.to) +
                                                  ", period " + std::to_string(t) +
                                                  ": gen_cap < capacity + demand");
      if (!(scenario.gen_cap(l.from, t) >= l.capacity + scenario.demand(l.from, t)))
        detail::fail_once(r.large_generation, detail::at("line", e) + ", bus " + std::to_string(l.from) +
                                                  ", period " + std::to_string(t) +
                                                  ": gen_cap < capacity + demand");
    }
    if (l.susceptance != 1.0)
      detail::fail_once(r.unit_admittance, detail::at("line", e) + ": susceptance != 1");
    if (l.capacity != grid.line(0).capacity)
      detail::fail_once(r.uniform_capacity, detail::at("line", e) + ": capacity differs from line 0");
  }
  return r;
}

inline std::string describe(const AssumptionReport& report) {
  std::ostringstream os;
  const auto checks = report.checks();
  for (std::size_t k = 0; k < checks.size(); ++k) {
    os << kAssumptionNames[k] << ": " << (checks[k]->holds ? "holds" : "VIOLATED");
    if (!checks[k]->holds) os << " (" << checks[k]->first_violation << ")";
    os << '\n';
  }
  return os.str();
}

}  // namespace batplace
