#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "oracles/oracles.hpp"
#include "plas/errors.hpp"
#include "plas/log.hpp"
#include "plas/recommend.hpp"

namespace {

using plas::AipwScoreTable;
using plas::CellPartition;
using plas::Policy;
using plas::PolicyClass;
using plas::PolicyKind;

plas::Record record(std::size_t arm, double y, std::vector<double> w, std::vector<double> mu) {
  plas::Record r;
  r.t = 1;
  r.context = {0.0};
  r.arm = arm;
  r.outcome = y;
  r.w = std::move(w);
  r.mu_hat = std::move(mu);
  r.sigma_hat.assign(r.w.size(), 1.0);
  return r;
}

AipwScoreTable table(const std::vector<std::vector<double>>& rows) {
  AipwScoreTable t(rows.front().size(), 10.0, 0.25);
  for (const auto& r : rows) t.push_row(r);
  return t;
}

TEST(Clip, Levels) {
  EXPECT_EQ(plas::clip_outcome(3, 10), 3);
  EXPECT_EQ(plas::clip_outcome(-15, 10), -10);
  EXPECT_EQ(plas::clip_outcome(10, 10), 10);
  EXPECT_NEAR(plas::clip_level_for(10000, 0.25), 10.0, 1e-12);
  EXPECT_THROW(plas::clip_level_for(100, 0.5), std::invalid_argument);
  EXPECT_THROW(plas::clip_level_for(100, 0.0), std::invalid_argument);
}

TEST(AipwScore, ZeroResidual) {
  auto g = plas::aipw_score(record(0, 1.5, {0.5, 0.5}, {1.5, -2.0}), 10.0);
  EXPECT_EQ(g, (std::vector<double>{1.5, -2.0}));
}

TEST(AipwScore, DirectEvaluation) {
  auto g = plas::aipw_score(record(0, 2.0, {0.5, 0.5}, {1.0, 0.0}), 10.0);
  EXPECT_EQ(g[0], 3.0);
  EXPECT_EQ(g[1], 0.0);
}

TEST(AipwScore, OutcomeIsClippedBeforeWeighting) {
  auto g = plas::aipw_score(record(1, 50.0, {0.75, 0.25}, {0.0, 1.0}), 10.0);
  EXPECT_EQ(g[1], (10.0 - 1.0) / 0.25 + 1.0);
}

TEST(AipwScore, ZeroWeightOnPulledArmIsInvalid) {
  EXPECT_THROW(plas::aipw_score(record(1, 1.0, {1.0, 0.0}, {0.0, 0.0}), 10.0),
               plas::InvalidRecord);
}

TEST(AipwScore, EnumerationIsExactlyUnbiased) {
  std::vector<double> mean{0.3, 0.8}, w{0.35, 0.65};
  auto e = plas::oracle::enumerate_aipw_expectation(mean, w);
  EXPECT_NEAR(e[0], 0.3, 1e-15);
  EXPECT_NEAR(e[1], 0.8, 1e-15);
}

TEST(AipwScore, MonteCarloMeanZeroWithTrueNuisances) {
  const std::vector<double> mu{1.0, -0.5, 2.0}, sd{1.0, 2.0, 0.5}, w{0.2, 0.5, 0.3};
  plas::Rng rng = plas::make_rng(55, 2);
  std::normal_distribution<double> z;
  const int n = 100000;
  std::vector<double> s(3, 0.0), ss(3, 0.0);
  for (int i = 0; i < n; ++i) {
    std::size_t a = plas::draw_arm(w, plas::uniform01(rng));
    double y = mu[a] + sd[a] * z(rng);
    auto g = plas::aipw_score(record(a, y, w, mu), 1e9);
    for (std::size_t b = 0; b < 3; ++b) {
      double d = g[b] - mu[b];
      s[b] += d;
      ss[b] += d * d;
    }
  }
  for (std::size_t b = 0; b < 3; ++b) {
    double mean = s[b] / n;
    double se = std::sqrt((ss[b] / n - mean * mean) / n);
    EXPECT_LT(std::abs(mean), 4 * se) << "arm " << b;
  }
}

TEST(ScoreTable, RejectsNonFinite) {
  AipwScoreTable t(2, 10.0, 0.25);
  EXPECT_THROW(t.push_row(std::vector<double>{1.0, NAN}), std::invalid_argument);
  EXPECT_THROW(t.push_row(std::vector<double>{1.0}), std::invalid_argument);
  t.push_row(std::vector<double>{1.0, 2.0});
  EXPECT_EQ(t.scaled(2.0).row(0)[1], 4.0);
  std::ostringstream os;
  plas::write_scores_csv(t, os);
  EXPECT_EQ(os.str(), "t,gamma_1,gamma_2\n1,1,2\n");
}

TEST(EmpiricalValue, SingleRowAndSymmetry) {
  std::vector<std::vector<double>> one_ctx{{0.0}};
  auto p2 = Policy::deterministic(PolicyKind::tabular, CellPartition::single(),
                                  std::vector<std::size_t>{1}, 2);
  EXPECT_EQ(plas::empirical_policy_value(table({{3, 5}}), one_ctx, p2), 5.0);
  std::vector<std::vector<double>> two_ctx{{0.0}, {1.0}};
  auto u = Policy::uniform(CellPartition::single(), 2);
  EXPECT_EQ(plas::empirical_policy_value(table({{1, 3}, {3, 1}}), two_ctx, u), 2.0);
  EXPECT_THROW(plas::empirical_policy_value(table({{1, 3}}), two_ctx, u), std::invalid_argument);
}

TEST(TrainPolicy, SingleCellArgmax) {
  std::vector<std::vector<double>> ctx(1, {0.0});
  auto cls = PolicyClass::tabular(CellPartition::single(), 4);
  auto p = plas::train_policy(table({{10, 12, 9, 9}}), ctx, cls);
  EXPECT_EQ(p.deterministic_arm(0), 1u);
}

TEST(TrainPolicy, AllZeroTiesGoToFirstArm) {
  std::vector<std::vector<double>> ctx{{0.1, 0.1}, {0.9, 0.9}, {0.1, 0.9}, {0.9, 0.1}};
  auto cls = PolicyClass::tabular(CellPartition::quadrants(0.5), 3);
  auto p = plas::train_policy(table({{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}}), ctx, cls);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(p.deterministic_arm(c), 0u);
}

TEST(TrainPolicy, EmptyCellWarnsAndUsesFirstArm) {
  std::vector<std::string> messages;
  auto previous =
      plas::set_warning_handler([&](std::string_view m) { messages.emplace_back(m); });
  std::vector<std::vector<double>> ctx{{0.9, 0.9}};
  auto cls = PolicyClass::tabular(CellPartition::quadrants(0.5), 2);
  auto p = plas::train_policy(table({{0, 1}}), ctx, cls);
  plas::set_warning_handler(previous);
  EXPECT_EQ(p.deterministic_arm(3), 1u);
  EXPECT_EQ(p.deterministic_arm(0), 0u);
  EXPECT_EQ(messages.size(), 3u);
}

TEST(TrainPolicy, PropertyMatchesExhaustiveSearch) {
  plas::Rng rng = plas::make_rng(4242, 0);
  std::normal_distribution<double> score(0.0, 3.0);
  std::normal_distribution<double> where(0.5, 0.6);
  auto previous = plas::set_warning_handler({});
  for (int rep = 0; rep < 30; ++rep) {
    std::size_t arms = 2 + rep % 3;
    std::size_t n = 5 + rng() % 40;
    std::vector<std::vector<double>> ctx;
    AipwScoreTable t(arms, 10.0, 0.25);
    for (std::size_t i = 0; i < n; ++i) {
      ctx.push_back({where(rng), where(rng)});
      std::vector<double> row(arms);
      // Rounded scores create exact ties between arms.
      for (auto& v : row) v = std::round(score(rng));
      t.push_row(row);
    }
    std::vector<PolicyClass> classes{
        PolicyClass::tabular(CellPartition::quadrants(0.5), arms),
        PolicyClass::threshold(rep % 2, {-0.5, 0.0, 0.5, 1.0}, arms)};
    for (const auto& cls : classes) {
      auto p = plas::train_policy(t, ctx, cls);
      double best = plas::oracle::exhaustive_best_value(t, ctx, cls);
      ASSERT_NEAR(plas::empirical_policy_value(t, ctx, p), best, 1e-12) << "rep " << rep;
    }
  }
  plas::set_warning_handler(previous);
}

TEST(Recommend, DeterministicPolicyIgnoresSeed) {
  auto p = Policy::deterministic(PolicyKind::tabular, CellPartition::single(),
                                 std::vector<std::size_t>{2}, 3);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    plas::Rng rng = plas::make_rng(seed, 0);
    EXPECT_EQ(plas::recommend_arm(p, std::vector<double>{0.0}, rng), 2u);
  }
}

TEST(Recommend, RandomizedFrequencies) {
  Policy p(PolicyKind::tabular, CellPartition::single(), {{0.25, 0.75}});
  plas::Rng rng = plas::make_rng(6, 0);
  const int n = 10000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += plas::recommend_arm(p, std::vector<double>{0.0}, rng) == 1;
  EXPECT_LT(std::abs(hits / double(n) - 0.75), 3 * std::sqrt(0.75 * 0.25 / n));

  auto u = Policy::uniform(CellPartition::single(), 4);
  std::vector<int> counts(4, 0);
  for (int i = 0; i < n; ++i) ++counts[plas::recommend_arm(u, std::vector<double>{0.0}, rng)];
  for (int c : counts) EXPECT_LT(std::abs(c / double(n) - 0.25), 4 * std::sqrt(0.1875 / n));
}

}  // namespace
