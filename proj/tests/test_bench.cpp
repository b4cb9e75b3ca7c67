#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "batplace/bench.hpp"
#include "support/fixtures.hpp"
#include "support/random_instances.hpp"

using namespace batplace;
using namespace batplace::test_support;

namespace {

// drops t_a, t_s and the deadline-driven delta_t
std::string without_timing(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (i != 6 && i != 7 && i != 12) out << cells[i] << ';';
    out << '\n';
  }
  return out.str();
}

PlacementReport report(Eigen::VectorXd costs, double base, std::uint64_t hash) {
  PlacementReport r;
  r.cost_per_bus = std::move(costs);
  r.best_bus = argmin_lowest(r.cost_per_bus);
  r.base_cost = base;
  r.instance = hash;
  r.complete = true;
  return r;
}

}  // namespace

TEST(GenScenario, Deterministic) {
  const Grid g = build_ieee_case(IeeeSystem::Ieee15M);
  for (auto gen : {Generator::CaseI, Generator::CaseII, Generator::CaseIII}) {
    const Scenario a = gen_scenario(g, gen, 17), b = gen_scenario(g, gen, 17);
    EXPECT_TRUE(a.costs() == b.costs());
    EXPECT_TRUE(a.demands() == b.demands());
    EXPECT_TRUE(a.gen_caps() == b.gen_caps());
    EXPECT_FALSE(gen_scenario(g, gen, 18).costs() == a.costs());
  }
  const CaseSpec spec{Generator::CaseIII, 5, IeeeSystem::Ieee15, AdmittanceMode::RandomU01, 15};
  const Instance x = gen_instance(spec), y = gen_instance(spec);
  EXPECT_EQ(instance_hash(x.grid, x.scenario), instance_hash(y.grid, y.scenario));
}

TEST(GenScenario, Distributions) {
  const Grid g = build_ieee_case(IeeeSystem::Ieee33M);
  const Scenario two = gen_scenario(g, Generator::CaseII, 3);
  EXPECT_TRUE(validate_assumptions(g, two).sufficient_generation.holds);
  EXPECT_TRUE(validate_assumptions(g, two).distinct_costs.holds);
  EXPECT_EQ(two.horizon(), 15u);
  EXPECT_GE(two.demands().minCoeff(), 1.0);
  EXPECT_LT(two.demands().maxCoeff(), 2.0);
  EXPECT_GT(two.costs().minCoeff(), 0.0);
  EXPECT_LT(two.costs().maxCoeff(), 1.0);

  // high mode lies in [82, 122], low mode in [2, 3]; 3 sigma bands
  std::size_t high = 0, above_100 = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Scenario one = gen_scenario(g, Generator::CaseI, seed);
    high += static_cast<std::size_t>((one.gen_caps().array() > 50.0).count());
    above_100 += static_cast<std::size_t>((one.gen_caps().array() > 100.0).count());
    total += static_cast<std::size_t>(one.gen_caps().size());
    EXPECT_GE(one.gen_caps().minCoeff(), 2.0);
    EXPECT_EQ(((one.gen_caps().array() > 3.0) && (one.gen_caps().array() < 82.0)).count(), 0);
  }
  const double n = static_cast<double>(total);
  const auto band = [n](double p) { return 3.0 * std::sqrt(n * p * (1 - p)); };
  EXPECT_NEAR(static_cast<double>(high), 0.1 * n, band(0.1));
  // P(high) * P(N(0, 4) > -2 | |.| <= 20)
  const double p100 = 0.1 * 0.5 * std::erfc(-1.0 / std::sqrt(2.0));
  EXPECT_NEAR(static_cast<double>(above_100), p100 * n, band(p100));
}

TEST(GenInstance, CaseThreeLinesAndAdmittance) {
  const Instance inst = gen_instance({Generator::CaseIII, 9, IeeeSystem::Ieee15, AdmittanceMode::RandomU01, 15});
  for (const Line& l : inst.grid.lines()) {
    EXPECT_GE(l.capacity, 0.01);
    EXPECT_LE(l.capacity, 1.0);
    EXPECT_GE(l.susceptance, 1e-3);
    EXPECT_LT(l.susceptance, 1.0);
  }
  const Instance unit = gen_instance({Generator::CaseI, 9, IeeeSystem::Ieee15M, AdmittanceMode::Unit, 15});
  for (const Line& l : unit.grid.lines()) {
    EXPECT_EQ(l.capacity, 1.0);
    EXPECT_EQ(l.susceptance, 1.0);
  }
  EXPECT_EQ(gen_instance({Generator::CaseI, 1, TriangleFamily{15}, AdmittanceMode::Unit, 4}).grid.bus_count(), 15u);
}

TEST(ComputeDeltas, Examples) {
  const auto oracle = report(Eigen::Vector2d(9.8, 9.8), 12.0, 42);
  const auto d = compute_deltas(oracle, oracle);
  EXPECT_NEAR(d.delta, 2.2 / 12.0, 1e-15);
  EXPECT_EQ(d.delta_a, 0.0);
  EXPECT_EQ(d.delta_m, 0.0);
  EXPECT_EQ(d.delta_w, 0.0);

  const auto skewed = report(Eigen::Vector3d(10, 11, 13), 20.0, 7);
  auto fast = skewed;
  fast.best_bus = 1;
  const auto e = compute_deltas(fast, skewed);
  EXPECT_NEAR(e.delta, 0.5, 1e-15);
  EXPECT_NEAR(e.delta_a, 0.1, 1e-15);
  EXPECT_NEAR(e.delta_m, 0.4 / 3.0, 1e-15);
  EXPECT_NEAR(e.delta_w, 0.3, 1e-15);
  EXPECT_NEAR(e.performance_increase, 0.4 / 3.0 - 0.1, 1e-15);

  fast.instance = 8;
  try {
    compute_deltas(fast, skewed);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::MismatchedInstance);
  }
}

TEST(ComputeDeltas, ChainOnRealReports) {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Grid g = random_cactus(rng, 4 + pick(rng, 6));
    const Scenario sc = random_scenario(rng, g.bus_count(), 3);
    const auto oracle = solve_placement_enumeration(g, sc);
    const auto fast = evaluate_placement(g, sc, InflowBackend::FastPath);
    const auto d = compute_deltas(fast, oracle);
    EXPECT_GE(d.delta_a, -1e-12);
    EXPECT_GE(d.delta_m, -1e-12);
    EXPECT_LE(d.delta_m, d.delta_w + 1e-12);
    EXPECT_LE(d.delta_a, d.delta_w + 1e-12);
  }
}

TEST(DeltaUpperBound, Examples) {
  EXPECT_NEAR(delta_upper_bound(p2(), sc_a(2), 0), 1.0 / 3.0, 1e-15);
  const Scenario single(Eigen::VectorXd::Constant(1, 1.0), Eigen::MatrixXd::Constant(2, 1, 2.0),
                        Eigen::MatrixXd::Constant(2, 1, 3.2));
  EXPECT_EQ(delta_upper_bound(p2(), single, 0), 0.0);
}

TEST(DeltaUpperBound, DominatesRealizedSaving) {
  Rng rng(32);
  for (int trial = 0; trial < 30; ++trial) {
    const Grid g = random_cactus(rng, 3 + pick(rng, 8));
    const Scenario sc = random_scenario(rng, g.bus_count(), 2 + pick(rng, 4), 1.0, 2.0, 0.0, 1.5);
    const auto oracle = solve_placement_enumeration(g, sc);
    for (BusId b = 0; b < g.bus_count(); ++b) {
      const double saving = (oracle.base_cost - oracle.cost_per_bus[static_cast<Eigen::Index>(b)]) / oracle.base_cost;
      EXPECT_LE(saving, delta_upper_bound(g, sc, b) + 1e-12);
    }
  }
}

TEST(Benchmark, CsvLayoutAndDeterminism) {
  const std::vector<CaseSpec> specs{
      {Generator::CaseII, 100, TriangleFamily{6}, AdmittanceMode::Unit, 4},
      {Generator::CaseI, 100, IeeeSystem::Ieee15M, AdmittanceMode::RandomU01, 4},
  };
  BenchOptions opts;
  opts.oracle = OracleKind::Dispatch;
  opts.budgeted = true;
  const auto a = run_benchmark(specs, 3, {}, opts);
  const auto b = run_benchmark(specs, 3, {}, opts);
  ASSERT_TRUE(a.failures.empty());
  ASSERT_EQ(a.rows.size(), 6u);
  std::ostringstream ca, cb;
  write_csv(ca, a.rows);
  write_csv(cb, b.rows);
  EXPECT_EQ(without_timing(ca.str()), without_timing(cb.str()));

  std::istringstream lines(ca.str());
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header,
            "case_name,generator,seed,n,m,admittance_mode,t_a_seconds,t_s_seconds,delta,delta_a,delta_m,delta_w,"
            "delta_t,b_star,b_fast,assumption_flags");
  EXPECT_EQ(a.rows.front().case_name, "ieee15m");
  EXPECT_EQ(a.rows.back().case_name, "triangle6");
  EXPECT_EQ(a.rows.front().seed, 100u);
  EXPECT_EQ(a.rows[2].seed, 102u);
  for (const auto& r : a.rows) {
    ASSERT_TRUE(r.metrics.delta_t.has_value());
    EXPECT_GE(*r.metrics.delta_t, -1e-12);
    EXPECT_EQ(r.assumption_flags.size(), 6u);
  }
  for (const auto& r : a.rows)
    if (r.admittance_mode == "unit") EXPECT_LE(r.metrics.delta_a, 1e-9);
}

TEST(Benchmark, FailuresAreRecorded) {
  const std::vector<CaseSpec> specs{{Generator::CaseI, 1, FromFile{"/nonexistent/case.json"}, AdmittanceMode::Unit, 3}};
  const auto r = run_benchmark(specs, 2);
  EXPECT_TRUE(r.rows.empty());
  ASSERT_EQ(r.failures.size(), 2u);
  EXPECT_NE(r.failures[0].message.find("Io"), std::string::npos);
  EXPECT_THROW(run_benchmark({}, 1, "/nonexistent/dir/out.csv"), Error);
}
