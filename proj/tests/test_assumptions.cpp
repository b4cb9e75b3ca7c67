#include <gtest/gtest.h>

#include "batplace/assumptions.hpp"
#include "support/fixtures.hpp"

using namespace batplace;
using namespace batplace::test_support;

TEST(Assumptions, AllHoldOnP2ScenarioA) {
  const auto r = validate_assumptions(p2(), sc_a(2));
  EXPECT_TRUE(r.all());
  EXPECT_EQ(r.flags(), "111111");
}

TEST(Assumptions, RepeatedCostBreaksDistinctness) {
  const auto r = validate_assumptions(p2(), sc_a(2, 3.2, Eigen::Vector2d(1.0, 1.0)));
  EXPECT_FALSE(r.distinct_costs.holds);
  EXPECT_FALSE(r.distinct_costs.first_violation.empty());
  EXPECT_EQ(r.flags(), "011111");
}

TEST(Assumptions, GenerationEqualToDemandIsNotSufficient) {
  const auto r = validate_assumptions(p2(), sc_a(2, 2.0));
  EXPECT_FALSE(r.sufficient_generation.holds);
  EXPECT_FALSE(r.large_generation.holds);  // 2 < 1 + 2
  EXPECT_TRUE(r.limited_transmission.holds);
}

TEST(Assumptions, LineAssumptions) {
  // capacity 2 equals demand: not strictly below
  EXPECT_FALSE(validate_assumptions(p2(2.0), sc_a(2, 10.0)).limited_transmission.holds);
  EXPECT_FALSE(validate_assumptions(p2(1.0, 0.5), sc_a(2)).unit_admittance.holds);
  const auto r = validate_assumptions(tri3(1.0, 1.0, 0.5), sc_a(3));
  EXPECT_FALSE(r.uniform_capacity.holds);
  EXPECT_NE(r.uniform_capacity.first_violation.find("line 2"), std::string::npos);
}

TEST(Assumptions, LargeGenerationBoundary) {
  // 3.0 = f + d exactly satisfies the non-strict inequality
  EXPECT_TRUE(validate_assumptions(p2(), sc_a(2, 3.0)).large_generation.holds);
  EXPECT_FALSE(validate_assumptions(p2(), sc_a(2, 2.99)).large_generation.holds);
}

TEST(Assumptions, DimensionMismatchThrows) { EXPECT_THROW(validate_assumptions(p2(), sc_a(3)), Error); }

TEST(Assumptions, DescribeNamesViolations) {
  const std::string text = describe(validate_assumptions(p2(), sc_a(2, 2.0)));
  EXPECT_NE(text.find("A2 sufficient generation: VIOLATED"), std::string::npos);
  EXPECT_NE(text.find("A1 distinct costs: holds"), std::string::npos);
}
