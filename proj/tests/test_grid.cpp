#include <random>

#include <gtest/gtest.h>

#include "batplace/grid.hpp"
#include "support/fixtures.hpp"
#include "support/random_instances.hpp"

using namespace batplace;
using namespace batplace::test_support;

TEST(Grid, RejectsInvalidConstruction) {
  EXPECT_THROW(Grid(0, {}), Error);
  EXPECT_THROW(Grid(2, {{0, 0, 1, 1}}), Error);
  EXPECT_THROW(Grid(2, {{0, 2, 1, 1}}), Error);
  EXPECT_THROW(Grid(2, {{0, 1, 0, 1}}), Error);
  EXPECT_THROW(Grid(2, {{0, 1, 1, -1}}), Error);
  EXPECT_THROW(Grid(2, {{0, 1, 1, 1}, {1, 0, 1, 1}}), Error);
  try {
    Grid(3, {{0, 1, 1, 1}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DisconnectedGrid);
  }
  EXPECT_NO_THROW(Grid(1, {}));
}

TEST(Grid, BusRangeIsChecked) {
  const Grid g = p2();
  try {
    (void)g.degree(2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BusOutOfRange);
  }
}

TEST(Grid, IncidenceExamples) {
  Eigen::MatrixXd expect(1, 2);
  expect << 1, -1;
  EXPECT_EQ(build_incidence(p2()), expect);
  Eigen::MatrixXd tri(3, 3);
  tri << 1, -1, 0, 0, 1, -1, 1, 0, -1;
  EXPECT_EQ(build_incidence(tri3()), tri);
  expect << 2, -2;
  EXPECT_EQ(build_incidence(p2(1.0, 2.0)), expect);
}

TEST(Grid, AdmittanceExamples) {
  Eigen::Matrix2d b;
  b << 1, -1, -1, 1;
  EXPECT_EQ(build_admittance(p2()), Eigen::MatrixXd(b));
  Eigen::Matrix3d tri;
  tri << 2, -1, -1, -1, 2, -1, -1, -1, 2;
  EXPECT_EQ(build_admittance(tri3()), Eigen::MatrixXd(tri));
  b << 2, -2, -2, 2;
  EXPECT_EQ(build_admittance(p2(1.0, 2.0)), Eigen::MatrixXd(b));
}

TEST(Grid, WeightedDegreeExamples) {
  EXPECT_DOUBLE_EQ(weighted_degree(p2(), 0), 1.0);
  EXPECT_DOUBLE_EQ(weighted_degree(s4(), 0), 3.0);
  EXPECT_DOUBLE_EQ(weighted_degree(tri3(1.0, 1.0, 0.5), 0), 1.5);
  EXPECT_THROW(weighted_degree(p2(), 5), Error);
}

TEST(Grid, LaplacianIdentitiesOnRandomGrids) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Grid base = random_meshed(rng, 2 + pick(rng, 12), pick(rng, 6));
    // unit susceptance: B = A'A
    const auto a = build_incidence(base);
    EXPECT_TRUE(build_admittance(base).isApprox(build_incidence(base, IncidenceWeighting::Unit).transpose() * a));
    const Grid g = with_random_lines(rng, base, 0.5, 2.0, 0.1, 3.0);
    const auto lap = build_admittance(g);
    EXPECT_NEAR(lap.rowwise().sum().cwiseAbs().maxCoeff(), 0.0, 1e-12);
    EXPECT_TRUE(lap.isApprox(lap.transpose()));
    // weighted B = A_unit' * A_weighted
    EXPECT_TRUE(lap.isApprox(build_incidence(g, IncidenceWeighting::Unit).transpose() * build_incidence(g)));
    double degree_sum = 0.0, cap_sum = 0.0;
    for (BusId i = 0; i < g.bus_count(); ++i) degree_sum += weighted_degree(g, i);
    for (const Line& l : g.lines()) cap_sum += l.capacity;
    EXPECT_NEAR(degree_sum, 2.0 * cap_sum, 1e-12);
  }
}

TEST(Grid, WithLineParametersKeepsTopology) {
  const Grid g = tri3();
  const std::vector<double> cap{1, 2, 3}, sus{0.5, 0.5, 0.5};
  const Grid h = g.with_line_parameters(cap, sus);
  EXPECT_EQ(h.line_count(), 3u);
  EXPECT_DOUBLE_EQ(h.line(2).capacity, 3.0);
  EXPECT_DOUBLE_EQ(h.line(1).susceptance, 0.5);
  EXPECT_THROW(g.with_line_parameters(std::vector<double>{1}, sus), Error);
}

TEST(Scenario, ValidatesShapesAndSigns) {
  EXPECT_THROW(Scenario(Eigen::VectorXd(0), Eigen::MatrixXd(1, 0), Eigen::MatrixXd(1, 0)), Error);
  EXPECT_THROW(Scenario(Eigen::Vector2d(1, 2), Eigen::MatrixXd::Ones(2, 3), Eigen::MatrixXd::Ones(2, 2)), Error);
  EXPECT_THROW(Scenario(Eigen::Vector2d(1, 0), Eigen::MatrixXd::Ones(2, 2), Eigen::MatrixXd::Ones(2, 2)), Error);
  EXPECT_THROW(Scenario(Eigen::Vector2d(1, 2), -Eigen::MatrixXd::Ones(2, 2), Eigen::MatrixXd::Ones(2, 2)), Error);
  EXPECT_THROW(sc_a(3).check_compatible(p2()), Error);
}

TEST(Scenario, BaseCost) {
  // 2 buses, demand 2, costs 1 and 2: 4*1 + 4*2
  EXPECT_DOUBLE_EQ(sc_a(2).base_cost(), 12.0);
  EXPECT_DOUBLE_EQ(sc_a(3).base_cost(), 18.0);
}
