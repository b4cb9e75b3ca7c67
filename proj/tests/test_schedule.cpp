#include <gtest/gtest.h>

#include "batplace/placement.hpp"
#include "batplace/schedule.hpp"
#include "support/fixtures.hpp"
#include "support/random_instances.hpp"

using namespace batplace;
using namespace batplace::test_support;

namespace {

MaxflowTable constant_table(std::size_t n, std::size_t horizon, double in, double out) {
  auto tab = MaxflowTable::sized(n, horizon, FlowSource::ClosedForm);
  tab.inflow.setConstant(in);
  tab.outflow.setConstant(out);
  return tab;
}

// Dispatch cost with the battery trajectory pinned to `u`.
double pinned_cost(const Grid& g, const Scenario& sc, BusId b, const Eigen::VectorXd& u) {
  auto prog = build_dispatch_lp(g, sc, b);
  const Eigen::Index first = prog.variable_count() - u.size();
  for (Eigen::Index t = 0; t < u.size(); ++t) prog.lower[first + t] = prog.upper[first + t] = u[t];
  const auto sol = lp::solve_lp(prog);
  EXPECT_EQ(sol.status, lp::Status::Optimal);
  return sol.objective;
}

Grid random_grid(Rng& rng) {
  switch (pick(rng, 3)) {
    case 0: return random_tree(rng, 2 + pick(rng, 8));
    case 1: return random_cactus(rng, 3 + pick(rng, 8));
    default: return with_random_lines(rng, random_meshed(rng, 3 + pick(rng, 6), pick(rng, 3)), 0.3, 1.5, 0.2, 2.0);
  }
}

}  // namespace

TEST(SortPeriods, Examples) {
  auto order = [](Eigen::VectorXd c) {
    return sort_periods(Scenario(c, Eigen::MatrixXd::Ones(1, c.size()), Eigen::MatrixXd::Ones(1, c.size())));
  };
  EXPECT_EQ(order(Eigen::Vector2d(1, 2)), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(order(Eigen::Vector3d(3, 1, 2)), (std::vector<std::size_t>{1, 2, 0}));
  EXPECT_EQ(order(Eigen::Vector2d(2, 2)), (std::vector<std::size_t>{0, 1}));
}

TEST(AdjustmentPeriod, Examples) {
  // 3.2 + 1 = 4.2 < 1 + 4 at k = 1
  EXPECT_EQ(adjustment_period(constant_table(2, 2, 1, 1), sc_a(2), 0), 2u);
  EXPECT_EQ(adjustment_period(constant_table(2, 2, 1, 1), sc_a(2, 100.0), 0), 1u);
  const Scenario single(Eigen::VectorXd::Constant(1, 1.0), Eigen::MatrixXd::Constant(2, 1, 2.0),
                        Eigen::MatrixXd::Constant(2, 1, 3.2));
  EXPECT_EQ(adjustment_period(constant_table(2, 1, 1, 1), single, 0), 1u);
  EXPECT_THROW(adjustment_period(constant_table(3, 2, 1, 1), sc_a(2), 0), Error);
}

TEST(BangBang, Examples) {
  const auto s = bang_bang_profile(constant_table(2, 2, 1, 1), sc_a(2), 0, 2);
  EXPECT_NEAR(s.control[0], -2.2, 1e-12);
  EXPECT_NEAR(s.control[1], 2.2, 1e-12);
  EXPECT_DOUBLE_EQ(s.initial_soc, 0.0);
  EXPECT_EQ(s.adjustment(), 1u);

  const Scenario reversed = sc_a(2, 3.2, Eigen::Vector2d(2.0, 1.0));
  const MaxflowTable tab = constant_table(2, 2, 1, 1);
  const auto r = bang_bang_profile(tab, reversed, 0, adjustment_period(tab, reversed, 0));
  EXPECT_NEAR(r.control[0], 2.2, 1e-12);
  EXPECT_NEAR(r.control[1], -2.2, 1e-12);
  EXPECT_NEAR(r.initial_soc, 2.2, 1e-12);

  const Scenario single(Eigen::VectorXd::Constant(1, 1.0), Eigen::MatrixXd::Constant(2, 1, 2.0),
                        Eigen::MatrixXd::Constant(2, 1, 3.2));
  const auto one = bang_bang_profile(constant_table(2, 1, 1, 1), single, 0, 1);
  EXPECT_DOUBLE_EQ(one.control[0], 0.0);
  EXPECT_DOUBLE_EQ(one.initial_soc, 0.0);
}

TEST(BangBang, WrongRankIsRejected) {
  // k = 1 would need the cheap period to absorb 2.2 of discharge
  try {
    bang_bang_profile(constant_table(2, 2, 1, 1), sc_a(2), 0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BalanceOutOfRange);
  }
  EXPECT_THROW(bang_bang_profile(constant_table(2, 2, 1, 1), sc_a(2), 0, 3), Error);
}

TEST(AnalyticCost, Examples) {
  EXPECT_NEAR(analytic_cost(constant_table(2, 2, 1, 1), sc_a(2), 0), 9.8, 1e-12);
  EXPECT_NEAR(analytic_cost(constant_table(3, 2, 2, 2), sc_a(3), 0), 14.8, 1e-12);
  const Scenario single(Eigen::VectorXd::Constant(1, 1.5), Eigen::MatrixXd::Constant(2, 1, 2.0),
                        Eigen::MatrixXd::Constant(2, 1, 3.2));
  EXPECT_DOUBLE_EQ(analytic_cost(constant_table(2, 1, 1, 1), single, 0), single.base_cost());
}

TEST(AnalyticCost, EqualsDispatchWithLpTables) {
  Rng rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const Grid g = random_grid(rng);
    const Scenario sc = random_scenario(rng, g.bus_count(), 2 + pick(rng, 4), 0.5, 2.0, 0.0, 1.5);
    const MaxflowTable tab = maxflow_table_lp(g, sc);
    for (BusId b = 0; b < g.bus_count(); ++b) {
      const double j = solve_dispatch(g, sc, b).cost;
      EXPECT_NEAR(analytic_cost(tab, sc, b), j, 1e-9 * j) << "trial " << trial << " bus " << b;
    }
  }
}

TEST(BangBang, ProfileIsAchievableAndOptimal) {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const Grid g = random_grid(rng);
    const Scenario sc = random_scenario(rng, g.bus_count(), 2 + pick(rng, 4));
    const MaxflowTable tab = maxflow_table_lp(g, sc);
    const BusId b = pick(rng, g.bus_count());
    const auto s = bang_bang_profile(tab, sc, b, adjustment_period(tab, sc, b));
    EXPECT_NEAR(s.control.sum(), 0.0, 1e-9);
    const double j = solve_dispatch(g, sc, b).cost;
    EXPECT_NEAR(pinned_cost(g, sc, b, s.control), j, 1e-9 * j) << "trial " << trial;
  }
}

TEST(AnalyticCost, MonotoneInFlowsAndBounded) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t horizon = 2 + pick(rng, 6);
    const Scenario sc = random_scenario(rng, 3, horizon);
    auto tab = MaxflowTable::sized(3, horizon, FlowSource::ClosedForm);
    for (Eigen::Index i = 0; i < 3; ++i)
      for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(horizon); ++t) {
        tab.inflow(i, t) = unif(rng, 0.01, 3.0);
        tab.outflow(i, t) = unif(rng, 0.01, 3.0);
      }
    const BusId b = pick(rng, 3);
    const double base = analytic_cost(tab, sc, b);
    EXPECT_LE(base, sc.base_cost() + 1e-12);
    EXPECT_GE(base, 0.0);
    auto bigger = tab;
    const auto t = static_cast<Eigen::Index>(pick(rng, horizon));
    if (trial % 2)
      bigger.inflow(static_cast<Eigen::Index>(b), t) += unif(rng, 0, 2);
    else
      bigger.outflow(static_cast<Eigen::Index>(b), t) += unif(rng, 0, 2);
    EXPECT_LE(analytic_cost(bigger, sc, b), base + 1e-12);
  }
}

TEST(EvaluatePlacement, LpBackendMatchesEnumeration) {
  const auto a = evaluate_placement(p2(), sc_a(2), InflowBackend::LpOracle);
  const auto b = solve_placement_enumeration(p2(), sc_a(2));
  EXPECT_NEAR((a.cost_per_bus - b.cost_per_bus).cwiseAbs().maxCoeff(), 0.0, 1e-9);
  EXPECT_EQ(a.best_bus, b.best_bus);
  EXPECT_EQ(a.instance, b.instance);
}

TEST(EvaluatePlacement, FastBackendExamples) {
  const auto tri = evaluate_placement(tri3(), sc_a(3), InflowBackend::FastPath);
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(tri.cost_per_bus[i], 14.8, 1e-12);
  EXPECT_EQ(tri.best_bus, 0u);
  EXPECT_EQ(evaluate_placement(s4(), sc_a(4), InflowBackend::FastPath).best_bus, 0u);
  try {
    evaluate_placement(k4(), sc_a(4), InflowBackend::FastPath);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedTopology);
  }
}
