#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "plas/policy.hpp"

namespace {

using plas::CellPartition;
using plas::Policy;
using plas::PolicyClass;
using plas::PolicyKind;

plas::BanditModel quadrant() {
  return plas::make_quadrant_model(plas::QuadrantSpec{}, {0.3, -0.2});
}

CellPartition split_on(std::size_t dim, std::vector<double> cuts) {
  return CellPartition(std::vector<CellPartition::Split>{{dim, std::move(cuts)}});
}

Policy quadrant_policy(std::vector<std::size_t> arms) {
  return Policy::deterministic(PolicyKind::tabular, CellPartition::quadrants(0.5), arms, 4);
}

TEST(Policy, RowsMustBeDistributions) {
  auto part = CellPartition::single();
  EXPECT_THROW(Policy(PolicyKind::tabular, part, {{0.5, 0.4}}), std::invalid_argument);
  EXPECT_THROW(Policy(PolicyKind::tabular, part, {{1.2, -0.2}}), std::invalid_argument);
  EXPECT_THROW(Policy(PolicyKind::tabular, part, {{0.5, 0.5}, {0.5, 0.5}}),
               std::invalid_argument);
  EXPECT_NO_THROW(Policy(PolicyKind::tabular, part, {{0.25, 0.75}}));
}

TEST(Policy, ThresholdMustBeSingleCutAndDeterministic) {
  auto one_cut = split_on(0, {0.0});
  EXPECT_THROW(Policy(PolicyKind::threshold, one_cut, {{0.5, 0.5}, {1, 0}}),
               std::invalid_argument);
  EXPECT_THROW(Policy(PolicyKind::threshold, CellPartition::quadrants(0.5),
                      {{1, 0}, {1, 0}, {1, 0}, {1, 0}}),
               std::invalid_argument);
  EXPECT_NO_THROW(Policy(PolicyKind::threshold, one_cut, {{0, 1}, {1, 0}}));
}

TEST(Policy, JsonRoundTrip) {
  Policy p(PolicyKind::tabular, split_on(1, {-0.5, 0.25}),
           {{0.1, 0.9}, {1.0, 0.0}, {0.3, 0.7}});
  auto j = plas::policy_to_json(p);
  EXPECT_EQ(j["kind"], "tabular");
  EXPECT_EQ(plas::policy_from_json(j), p);
  Policy t = Policy::deterministic(PolicyKind::threshold, split_on(0, {1.5}),
                                   std::vector<std::size_t>{2, 0}, 3);
  EXPECT_EQ(plas::policy_from_json(plas::policy_to_json(t)), t);
}

TEST(PolicyValue, BestArmEverywhereIsFive) {
  auto m = quadrant();
  auto best = quadrant_policy(plas::quadrant_best_arms(plas::QuadrantSpec{}));
  ASSERT_TRUE(plas::has_exact_value(best, m));
  EXPECT_DOUBLE_EQ(plas::policy_value(best, m), 5.0);
  EXPECT_DOUBLE_EQ(plas::optimal_value(m), 5.0);
  EXPECT_DOUBLE_EQ(plas::simple_regret(best, m), 0.0);
}

TEST(PolicyValue, UniformIsWeightedAverage) {
  auto m = quadrant();
  auto u = Policy::uniform(CellPartition::quadrants(0.5), 4);
  EXPECT_NEAR(plas::policy_value(u, m), 4.625, 1e-14);
  EXPECT_NEAR(plas::simple_regret(u, m), 0.375, 1e-14);
}

TEST(PolicyValue, AlwaysBaseArmRegretIsHalf) {
  auto m = quadrant();
  auto worst = quadrant_policy({2, 2, 2, 2});
  EXPECT_NEAR(plas::simple_regret(worst, m), 0.5, 1e-14);
}

TEST(PolicyValue, TwoCellAverage) {
  auto half = split_on(0, {0.0});
  plas::CellStructure cells{half, {}, {{1.0, 0.0}, {3.0, 0.0}}, {{1, 1}, {1, 1}}};
  auto m = plas::BanditModel::piecewise(cells, plas::GaussianContexts{{0.0}, {1.0}});
  auto p = Policy::deterministic(PolicyKind::tabular, CellPartition::single(),
                                 std::vector<std::size_t>{0}, 2);
  EXPECT_NEAR(plas::policy_value(p, m), 2.0, 1e-15);
}

TEST(PolicyValue, FiniteSupportIsExact) {
  plas::BanditModel m(
      2, 1, [](std::size_t a, std::span<const double> x) { return a == 0 ? x[0] : 1.0; },
      [](std::size_t, std::span<const double>) { return 1.0; },
      plas::FiniteContexts{{{0.0}, {2.0}}, {0.25, 0.75}});
  auto p = Policy::deterministic(PolicyKind::tabular, CellPartition::single(),
                                 std::vector<std::size_t>{0}, 2);
  ASSERT_TRUE(plas::has_exact_value(p, m));
  EXPECT_DOUBLE_EQ(plas::policy_value(p, m), 1.5);
  EXPECT_DOUBLE_EQ(plas::optimal_value(m), 0.25 * 1.0 + 0.75 * 2.0);
}

TEST(PolicyValue, MonteCarloFallbackAgreesWithExact) {
  auto m = quadrant();
  // Threshold on a cut that is not on the model partition forces Monte Carlo.
  auto off_grid = Policy::deterministic(PolicyKind::threshold, split_on(0, {0.0}),
                                        std::vector<std::size_t>{3, 0}, 4);
  ASSERT_FALSE(plas::has_exact_value(off_grid, m));
  plas::PolicyValueOptions opt{200000, 9};
  double mc = plas::policy_value(off_grid, m, opt);
  EXPECT_GT(mc, 4.5);
  EXPECT_LT(mc, 5.0);
  double regret = plas::simple_regret(off_grid, m, opt);
  EXPECT_NEAR(regret, plas::optimal_value(m) - mc, 0.01);
  EXPECT_GE(regret, 0.0);
}

TEST(PolicyClass, EnumerationSizes) {
  auto tab = PolicyClass::tabular(CellPartition::quadrants(0.5), 3);
  EXPECT_EQ(tab.enumerate().size(), 81u);
  EXPECT_EQ(tab.size(), 81.0);
  auto thr = PolicyClass::threshold(0, {-1.0, 0.0, 1.0}, 2);
  EXPECT_EQ(thr.enumerate().size(), 12u);
  EXPECT_EQ(thr.cell_count(), 2u);
}

PolicyClass tabular_with_cells(std::size_t m, std::size_t k) {
  std::vector<double> cuts;
  for (std::size_t i = 1; i < m; ++i) cuts.push_back(static_cast<double>(i));
  return PolicyClass::tabular(m == 1 ? CellPartition::single() : split_on(0, cuts), k);
}

TEST(Natarajan, TabularEqualsCellCount) {
  auto r1 = plas::natarajan_dimension(tabular_with_cells(1, 2));
  EXPECT_EQ(r1.dimension, 1u);
  EXPECT_TRUE(r1.certified);
  auto r4 = plas::natarajan_dimension(PolicyClass::tabular(CellPartition::quadrants(0.5), 4));
  EXPECT_EQ(r4.dimension, 4u);
  EXPECT_TRUE(r4.certified);
  auto r3 = plas::natarajan_dimension(tabular_with_cells(3, 2));
  EXPECT_EQ(r3.dimension, 3u);
  EXPECT_TRUE(r3.certified);
}

TEST(Natarajan, ThresholdClassIsTwo) {
  EXPECT_EQ(plas::natarajan_dimension(PolicyClass::threshold(0, {-1, 0, 1}, 2)).dimension, 2u);
  EXPECT_EQ(plas::natarajan_dimension(PolicyClass::threshold(0, {-1, 0, 1}, 3)).dimension, 2u);
}

TEST(Natarajan, LargeClassFallsBackToAnalytic) {
  auto r = plas::natarajan_dimension(tabular_with_cells(20, 3));
  EXPECT_EQ(r.dimension, 20u);
  EXPECT_FALSE(r.certified);
}

TEST(Natarajan, ShatteringOnHandMadeLabelings) {
  // A single labeling shatters nothing; two labelings differing on one point
  // shatter that point.
  EXPECT_EQ(plas::shattering_dimension({{0, 0, 0}}, 3, 2), 0u);
  EXPECT_EQ(plas::shattering_dimension({{0, 0, 0}, {0, 1, 0}}, 3, 2), 1u);
  // All four labelings of two binary points.
  EXPECT_EQ(plas::shattering_dimension({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, 2, 2), 2u);
  // Natarajan shattering with three labels: f1 = (0,0), f2 = (1,2) and the
  // mixed members (0,2), (1,0) shatter both points.
  EXPECT_EQ(plas::shattering_dimension({{0, 0}, {1, 2}, {0, 2}, {1, 0}}, 2, 3), 2u);
}

TEST(EntropyIntegral, Values) {
  auto two = plas::entropy_integral_bound(2, 4, 2);
  EXPECT_EQ(two.value, 5.0);
  EXPECT_FALSE(two.parametric);
  EXPECT_EQ(plas::entropy_integral_bound(2, 1, 2).value, 2.5);
  auto many = plas::entropy_integral_bound(4, 4, 2);
  EXPECT_TRUE(many.parametric);
  EXPECT_NEAR(many.value, 1.6651092223153954, 1e-15);
  EXPECT_NEAR(plas::entropy_integral_bound(4, 4, 2, 3.0).value, 3 * 1.6651092223153954,
              1e-14);
}

}  // namespace
