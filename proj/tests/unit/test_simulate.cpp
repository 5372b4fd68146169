#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/binomial.hpp>
#include <cmath>

#include "fixtures.hpp"
#include "jdrisk/constrained.hpp"
#include "jdrisk/error.hpp"
#include "jdrisk/simulate.hpp"

using namespace jdrisk;
using jdrisk::testing::market_1d;

namespace {

constexpr std::size_t kNodes = 65;

MarketModel jump_market() {
  return market_1d(0.02, 0.08, 0.25, 1.5, JumpLaw::point_masses({{-0.1, 0.4}, {0.15, 0.6}}), 1.0, kNodes);
}

Strategy constant_pi(const MarketModel& m, double pi, double v = 0.0) {
  return Strategy::from_pi(m, std::vector<Eigen::VectorXd>(m.nodes(), Eigen::VectorXd::Constant(1, pi)),
                           std::vector<double>(m.nodes(), v));
}

Estimate mean_se(std::span<const double> xs) {
  double s = 0.0, s2 = 0.0;
  for (double x : xs) s += x;
  const double n = static_cast<double>(xs.size());
  const double mean = s / n;
  for (double x : xs) s2 += (x - mean) * (x - mean);
  return {mean, std::sqrt(s2 / (n - 1) / n)};
}

}  // namespace

TEST(Simulate, BankAccountIsDeterministic) {
  const auto m = market_1d(0.03, 0.08, 0.2, 0.0, JumpLaw::point_masses({{0.0, 1.0}}), 1.0, kNodes);
  const auto ens = simulate(m, Strategy::zero(m), 2.0, 100, 1);
  for (std::size_t k = 0; k < m.nodes(); ++k)
    for (double w : ens.at_node(k)) EXPECT_NEAR(w, 2.0 * std::exp(m.R()[k]), 1e-14);
  EXPECT_NEAR(empirical_var(ens, m, 2.0, 0.05, kNodes - 1), 0.0, 1e-13);
  EXPECT_NEAR(empirical_es(ens, m, 2.0, 0.05, kNodes - 1), 0.0, 1e-13);
  const auto c = estimate_cost(ens, m, Strategy::zero(m), UtilitySpec::equal(0.5));
  EXPECT_NEAR(c.mean, std::sqrt(2.0 * std::exp(0.03)), 1e-14);
  EXPECT_LT(c.std_error, 1e-14);
}

TEST(Simulate, BitIdenticalForSameSeed) {
  const auto m = jump_market();
  const auto s = constant_pi(m, 0.6, 0.1);
  const auto a = simulate(m, s, 1.0, 500, 77);
  const auto b = simulate(m, s, 1.0, 500, 77);
  const auto c = simulate(m, s, 1.0, 500, 78);
  EXPECT_EQ(a.wealth, b.wealth);
  EXPECT_EQ(a.jump_counts, b.jump_counts);
  EXPECT_NE(a.wealth, c.wealth);
  for (double w : a.wealth) EXPECT_GT(w, 0.0);
}

TEST(Simulate, RecordedNodesSubset) {
  const auto m = jump_market();
  const auto s = constant_pi(m, 0.6);
  const auto full = simulate(m, s, 1.0, 200, 5);
  const auto part = simulate(m, s, 1.0, 200, 5, {64, 32});
  ASSERT_EQ(part.nodes, (std::vector<std::size_t>{32, 64}));
  const auto a = full.at_node(32), b = part.at_node(32);
  EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  EXPECT_THROW(part.at_node(10), Error);
}

TEST(Simulate, StochasticExponentialHasUnitMean) {
  const auto m = market_1d(0.02, 0.08, 0.25, 0.0, JumpLaw::point_masses({{0.0, 1.0}}), 1.0, kNodes);
  const auto s = constant_pi(m, 0.8);
  const auto ens = simulate(m, s, 1.0, 100000, 11, {16, 64});
  const auto yth = y_theta_path(m, s);
  for (std::size_t node : {16u, 64u}) {
    std::vector<double> e;
    for (double w : ens.at_node(node)) e.push_back(w * std::exp(-m.R()[node] - yth[node]));
    const auto est = mean_se(e);
    EXPECT_NEAR(est.mean, 1.0, 3.0 * est.std_error) << node;
  }
}

TEST(Simulate, MeanWealthMatchesClosedFormWithJumps) {
  const auto m = jump_market();
  const auto s = constant_pi(m, 0.7, 0.2);
  const auto ens = simulate(m, s, 1.0, 100000, 12, {64});
  const double closed = std::exp(m.R()[64] - s.V[64] + y_theta_path(m, s)[64]);
  const auto est = mean_se(ens.at_node(64));
  EXPECT_NEAR(est.mean, closed, 3.0 * est.std_error);
}

TEST(Simulate, JumpCountsArePoisson) {
  const auto m = jump_market();
  const auto ev = draw_jumps(m, 100000, 3);
  std::vector<double> c(ev.counts.begin(), ev.counts.end());
  const auto est = mean_se(c);
  EXPECT_NEAR(est.mean, 1.5, 3.0 * est.std_error);
  std::size_t total = 0;
  for (auto k : ev.counts) total += k;
  EXPECT_EQ(ev.events.size(), total);
  EXPECT_EQ(ev.offsets.back(), total);
}

TEST(Simulate, EmpiricalVarMatchesLognormalClosedForm) {
  const auto m = market_1d(0.02, 0.08, 0.25, 0.0, JumpLaw::point_masses({{0.0, 1.0}}), 1.0, kNodes);
  const auto s = constant_pi(m, 0.8, 0.1);
  const std::size_t n = 100000;
  const auto ens = simulate(m, s, 1.0, n, 21, {64});
  const double yn = std::sqrt(y_norm_squared_path(m, s)[64]);
  const double scale = std::exp(m.R()[64] - s.V[64] + y_theta_path(m, s)[64]);
  std::vector<double> w(ens.at_node(64).begin(), ens.at_node(64).end());
  std::sort(w.begin(), w.end());
  const auto [l, u] = order_statistic_ci(n, 0.05, 0.99);
  const double q = scale * quantile_stoch_exp(yn, 0.05);
  EXPECT_LE(w[l - 1], q);
  EXPECT_GE(w[u - 1], q);
  const double es_closed = scale * es_stoch_exp(yn, 0.05);
  EXPECT_NEAR(empirical_es(ens, m, 1.0, 0.05, 64), std::exp(0.02) - es_closed, 0.01 * es_closed);
  EXPECT_GT(empirical_es(ens, m, 1.0, 0.05, 64), empirical_var(ens, m, 1.0, 0.05, 64));
  EXPECT_LT(empirical_var(ens, m, 1.0, 0.1, 64), empirical_var(ens, m, 1.0, 0.05, 64));
}

TEST(OrderStatisticCi, EndpointsAreTightBinomialBounds) {
  for (std::size_t n : {1000u, 10000u, 1000000u}) {
    for (double beta : {0.01, 0.05}) {
      const auto [l, u] = order_statistic_ci(n, beta, 0.99);
      const boost::math::binomial_distribution<double> B(static_cast<double>(n), beta);
      // P(B < l) <= 0.005 < P(B < l + 1)
      EXPECT_LE(boost::math::cdf(B, static_cast<double>(l - 1)), 0.005 + 1e-12);
      EXPECT_GT(boost::math::cdf(B, static_cast<double>(l)), 0.005);
      // P(B >= u) <= 0.005 < P(B >= u - 1)
      EXPECT_LE(1.0 - boost::math::cdf(B, static_cast<double>(u - 1)), 0.005 + 1e-12);
      EXPECT_GT(1.0 - boost::math::cdf(B, static_cast<double>(u - 2)), 0.005);
      EXPECT_LT(l, order_statistic_index(beta, n) + 1);
      EXPECT_GE(u, order_statistic_index(beta, n));
    }
  }
}

TEST(EstimateCost, MatchesClosedFormForSolverStrategy) {
  const auto m = jump_market();
  const UtilitySpec u = UtilitySpec::equal(0.5);
  const auto rep = solve_power_equal(m, u, 1.0);
  const auto est = estimate_cost(m, rep.strategy, u, 1.0, 100000, 31);
  EXPECT_NEAR(est.mean, rep.J_star, 3.0 * est.std_error);
  const auto ens = simulate(m, rep.strategy, 1.0, 20000, 31);
  const auto est2 = estimate_cost(ens, m, rep.strategy, u);
  EXPECT_NEAR(est2.mean, rep.J_star, 3.0 * est2.std_error);
}

TEST(GridOracle, UnconstrainedArgmaxNearMertonRatio) {
  const auto m = market_1d(0.02, 0.05, 0.3, 0.0, JumpLaw::point_masses({{0.0, 1.0}}), 1.0, kNodes);
  const UtilitySpec u = UtilitySpec::equal(0.5);
  const auto rep = solve_power_1d(m, u, 1.0);
  std::vector<double> pis, scales;
  for (int i = 0; i <= 50; ++i) pis.push_back(i / 50.0);
  for (int i = 0; i <= 20; ++i) scales.push_back(i / 10.0);
  const auto best = grid_oracle(m, u, std::nullopt, 1.0, pis, scales, {rep.strategy.v, rep.strategy.V});
  EXPECT_NEAR(best.pi, 0.03 / (0.5 * 0.09), 0.02 + 1e-12);
  EXPECT_LE(best.J, rep.J_star + 1e-12);
  EXPECT_EQ(best.evaluated, pis.size() * scales.size());
}

TEST(GridOracle, VacuousConstraintMatchesUnconstrained) {
  const auto m = jump_market();
  const UtilitySpec u = UtilitySpec::equal(0.5);
  const auto rep = solve_power_equal(m, u, 1.0);
  const std::vector<double> pis{0.0, 0.25, 0.5, 0.75, 1.0}, scales{0.5, 1.0};
  const ConsumptionShape shape{rep.strategy.v, rep.strategy.V};
  const auto a = grid_oracle(m, u, std::nullopt, 1.0, pis, scales, shape);
  const auto b = grid_oracle(m, u, RiskConstraint{RiskKind::VaR, RiskLevel::plain(0.05), 0.999999}, 1.0, pis, scales,
                             shape);
  EXPECT_EQ(a.J, b.J);
  try {
    grid_oracle(m, u, RiskConstraint{RiskKind::VaR, RiskLevel::plain(0.001), 1e-9}, 1.0, {1.0}, {1.0}, shape);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyFeasibleSet);
  }
}

TEST(ConstraintProfile, BankAccountAndBindingNode) {
  const auto m = market_1d(0.02, 0.06, 0.2, 0.0, JumpLaw::point_masses({{0.0, 1.0}}), 1.0, kNodes);
  for (double r : constraint_profile(m, Strategy::zero(m), RiskKind::VaR, 0.05, 0.1)) EXPECT_EQ(r, 0.0);
  const auto rep = solve_var_gamma1(m, RiskSpec{RiskKind::VaR, 0.05, 0.1}, 1.0);
  const auto prof = constraint_profile(m, rep.strategy, RiskKind::VaR, 0.05, 0.1);
  EXPECT_NEAR(prof.back(), 1.0, 1e-12);
  EXPECT_LE(*std::max_element(prof.begin(), prof.end()), 1.0 + 1e-12);
}

TEST(ConstraintProfile, MonteCarloBandCoversClosedForm) {
  const auto m = market_1d(0.02, 0.06, 0.2, 0.0, JumpLaw::point_masses({{0.0, 1.0}}), 1.0, 17);
  const auto s = constant_pi(m, 0.5, 0.05);
  // Eight bands per kind; Bonferroni keeps the family-wise miss rate at 1%.
  const double alpha = 0.01 / 16.0;
  for (auto kind : {RiskKind::VaR, RiskKind::ES}) {
    const auto closed = constraint_profile(m, s, kind, 0.05, 0.2);
    const auto mc = constraint_profile_mc(m, s, kind, 0.05, 0.2, 1.0, 50000, 41, 1.0 - alpha,
                                          -normal_quantile(alpha / 2));
    for (std::size_t k = 2; k < m.nodes(); k += 2) {
      EXPECT_LE(mc.ratio_low[k], closed[k]) << k;
      EXPECT_GE(mc.ratio_high[k], closed[k]) << k;
    }
  }
}

TEST(ConstraintProfile, PositiveJumpsDominatedByDiffusionProfile) {
  const auto m = market_1d(0.02, 0.07, 0.2, 0.3, JumpLaw::point_masses({{0.05, 0.5}, {0.2, 0.5}}), 1.0, 17);
  const auto rep = solve_var_gamma1(m, RiskSpec{RiskKind::VaR, 0.05, 0.1}, 1.0);
  const auto closed = constraint_profile(m, rep.strategy, RiskKind::VaR, 0.05, 0.1);
  const auto mc = constraint_profile_mc(m, rep.strategy, RiskKind::VaR, 0.05, 0.1, 1.0, 50000, 43);
  for (std::size_t k = 1; k < m.nodes(); ++k) EXPECT_LE(mc.ratio_low[k], closed[k]) << k;
}

TEST(Simulate, RejectsInadmissibleStrategy) {
  const auto m = jump_market();
  auto s = constant_pi(m, 0.5);
  s.pi[3][0] = 1.5;
  EXPECT_THROW(simulate(m, s, 1.0, 10, 1), Error);
}
