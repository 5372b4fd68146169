#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "jdrisk/error.hpp"
#include "jdrisk/unconstrained.hpp"

using namespace jdrisk;
using jdrisk::testing::market_1d;

namespace {

MarketModel two_asset_jumps(std::size_t nodes = 257) {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 0.2, 0.05, 0.0, 0.3;
  Eigen::VectorXd mu(2);
  mu << 0.11, 0.09;
  JumpSpec js;
  js.assets.push_back({0.8, JumpLaw::point_masses({{0.05, 0.5}, {0.15, 0.5}})});
  js.assets.push_back({1.2, JumpLaw::tabulated_density(0.0, 0.2, std::vector<double>(9, 5.0))});
  return MarketModel(TimeGrid::uniform(1.0, nodes), CoefficientPath::constant(nodes, 0.03, mu, sigma), js);
}

// Continuous-time value of the constant-coefficient Bernoulli problem.
double rho_constant(double h, double gamma, double tau) {
  const double q = 1.0 / (1.0 - gamma);
  return std::pow(std::exp(q * h * tau) + std::expm1(q * h * tau) / (q * h), 1.0 - gamma);
}

}  // namespace

TEST(PowerSolver, DiffusionClosedForm) {
  const double gamma = 0.5, r = 0.02, mu = 0.05, sig = 0.3;
  const auto m = market_1d(r, mu, sig, 0.0, JumpLaw::point_masses({{0.0, 1.0}}), 1.0, 4097);
  const auto rep = solve_power_1d(m, UtilitySpec::equal(gamma), 2.0);
  const double th = (mu - r) / sig, q = 2.0;
  const double h = gamma * r + 0.5 * (q - 1.0) * th * th;
  for (std::size_t k = 0; k < m.nodes(); k += 512) {
    EXPECT_NEAR(rep.strategy.y[k][0], q * th, 1e-11);
    EXPECT_NEAR(rep.h_star[k], h, 1e-11);
    EXPECT_NEAR(rep.rho[k], rho_constant(h, gamma, 1.0 - m.grid()[k]), 1e-8);
  }
  EXPECT_NEAR(rep.J_star, std::sqrt(2.0) * rho_constant(h, gamma, 1.0), 1e-8);
  EXPECT_TRUE(rep.flags.empty());
}

TEST(PowerSolver, EtaIsDecreasingAndVanishesAtOptimum) {
  const auto m = market_1d(0.01, 0.04, 0.25, 1.5, JumpLaw::point_masses({{-0.1, 0.3}, {0.2, 0.7}}));
  double prev = eta_1d(m, 0, 0.0, 0.4);
  for (double p = 0.02; p <= 1.0; p += 0.02) {
    const double cur = eta_1d(m, 0, p, 0.4);
    EXPECT_LT(cur, prev);
    prev = cur;
  }
  const auto rep = solve_power_1d(m, UtilitySpec::equal(0.4), 1.0);
  const double pi = rep.strategy.pi[0][0];
  ASSERT_GT(pi, 0.0);
  ASSERT_LT(pi, 1.0);
  EXPECT_LT(std::abs(eta_1d(m, 0, pi, 0.4)), 1e-10);
  EXPECT_LT(rep.foc_residual, 1e-10);
}

TEST(PowerSolver, OptimumMaximisesObjectivePointwise) {
  const auto m = market_1d(0.01, 0.12, 0.25, 1.5, JumpLaw::point_masses({{-0.1, 0.3}, {0.2, 0.7}}));
  const auto rep = solve_power_1d(m, UtilitySpec::equal(0.4), 1.0);
  for (double p = 0.0; p <= 1.0; p += 0.01)
    EXPECT_LE(power_objective(m, 10, Eigen::VectorXd::Constant(1, p), 0.4), rep.h_star[10] + 1e-14);
}

TEST(PowerSolver, BoxBoundaryFlagged) {
  const auto m = market_1d(0.0, 0.5, 0.2);
  const auto rep = solve_power_1d(m, UtilitySpec::equal(0.5), 1.0);
  EXPECT_DOUBLE_EQ(rep.strategy.pi[0][0], 1.0);
  EXPECT_TRUE(rep.has_flag("NoInteriorRoot"));
}

TEST(PowerSolver, MultiAssetAgreesWithScalarSolverInOneDimension) {
  const auto m = market_1d(0.01, 0.1, 0.3, 2.0, JumpLaw::point_masses({{0.1, 1.0}}));
  const auto a = solve_power_1d(m, UtilitySpec::equal(0.6), 1.0);
  const auto b = solve_power_equal(m, UtilitySpec::equal(0.6), 1.0);
  EXPECT_NEAR(a.strategy.pi[5][0], b.strategy.pi[5][0], 1e-10);
  EXPECT_NEAR(a.J_star, b.J_star, 1e-12);
}

TEST(PowerSolver, MultiAssetKktResidualAndPointwiseOptimality) {
  const auto m = two_asset_jumps();
  const auto rep = solve_power_equal(m, UtilitySpec::equal(0.5), 1.0);
  EXPECT_LT(rep.foc_residual, 1e-10);
  const std::size_t k = 100;
  for (double a = 0.0; a <= 1.0; a += 0.05)
    for (double b = 0.0; b <= 1.0; b += 0.05) {
      Eigen::VectorXd pi(2);
      pi << a, b;
      EXPECT_LE(power_objective(m, k, pi, 0.5), rep.h_star[k] + 1e-13);
    }
}

TEST(PowerSolver, CostOfOptimumEqualsValue) {
  const auto m = two_asset_jumps();
  const auto rep = solve_power_equal(m, UtilitySpec::equal(0.5), 3.0);
  EXPECT_NEAR(cost_function(m, UtilitySpec::equal(0.5), rep.strategy, 3.0), rep.J_star, 1e-12 * rep.J_star);
}

TEST(PowerSolver, PerturbationsLowerTheCost) {
  const auto m = two_asset_jumps();
  const UtilitySpec u = UtilitySpec::equal(0.5);
  const auto rep = solve_power_equal(m, u, 1.0);
  for (double dp : {-0.1, 0.05}) {
    for (double dv : {0.0, 0.2}) {
      if (dp == 0.0 && dv == 0.0) continue;
      std::vector<Eigen::VectorXd> pi = rep.strategy.pi;
      for (auto& p : pi) p = (p.array() + dp).max(0.0).min(1.0).matrix();
      std::vector<double> v = rep.strategy.v;
      for (double& c : v) c *= 1.0 + dv;
      const auto s = Strategy::from_pi(m, pi, v);
      EXPECT_LT(cost_function(m, u, s, 1.0), rep.J_star) << dp << ' ' << dv;
    }
  }
}

TEST(Bernoulli, ChiAndConsumptionConsistent) {
  const auto m = market_1d(0.03, 0.09, 0.2, 1.0, JumpLaw::point_masses({{0.1, 1.0}}));
  const auto rep = solve_power_1d(m, UtilitySpec::equal(0.3), 1.0);
  EXPECT_NEAR(chi_value(m.grid(), rep.g, 0.3), rep.chi, 1e-13);
  // Fraction of wealth left at T equals chi.
  EXPECT_NEAR(std::exp(-rep.strategy.V.back()), rep.chi, 1e-13);
  const auto v = v_star_path(m.grid(), rep.h_star, 0.3);
  const auto rho = rho_path(m.grid(), rep.h_star, 0.3);
  for (std::size_t k = 0; k < m.nodes(); k += 64) {
    EXPECT_NEAR(v[k], std::pow(rho[k], -1.0 / 0.7), 1e-13);
    EXPECT_NEAR(rep.strategy.v[k], v[k], 1e-15);
  }
  EXPECT_NEAR(rho.back(), 1.0, 1e-15);
}

TEST(LinearSolver, DirectionAndValue) {
  const auto m = market_1d(0.02, 0.07, 0.2);
  const auto rep = solve_linear(m, 2.0);
  EXPECT_NEAR(rep.strategy.pi[0][0], 1.0, 1e-12);
  EXPECT_NEAR(rep.J_star, 2.0 * std::exp(0.02 + 0.05), 1e-12);
  EXPECT_THROW(solve_linear(market_1d(0.1, 0.05, 0.2), 1.0), Error);
}

TEST(MertonComparison, CsvHasHeaderAndOneRowPerNode) {
  const auto m = market_1d(0.01, 0.1, 0.3, 2.0, JumpLaw::point_masses({{0.1, 1.0}}), 1.0, 33);
  const auto cmp = compare_merton(m, UtilitySpec::equal(0.5), 1.0);
  std::ostringstream os;
  write_comparison_csv(os, cmp);
  const std::string out = os.str();
  EXPECT_EQ(out.rfind("t,pi_jump,pi_diffusion,v_jump,v_diffusion\n", 0), 0u);
  EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 34);
}

TEST(PowerSolver, RejectsUnequalExponents) {
  EXPECT_THROW(solve_power_equal(market_1d(0.0, 0.1, 0.2), UtilitySpec(0.3, 0.5), 1.0), Error);
}
