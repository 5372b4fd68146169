#include <benchmark/benchmark.h>

#include "jdrisk/constrained.hpp"
#include "jdrisk/negjumps.hpp"
#include "jdrisk/unconstrained.hpp"

namespace {

using namespace jdrisk;

MarketModel jump_market(std::size_t nodes, int d, double lambda = 1.0) {
  Eigen::VectorXd mu = Eigen::VectorXd::LinSpaced(d, 0.05, 0.08);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(d, d) * 0.25;
  for (int i = 0; i + 1 < d; ++i) sigma(i, i + 1) = 0.04;
  JumpSpec jumps = JumpSpec::none(d);
  for (auto& a : jumps.assets) {
    a.lambda = lambda;
    a.law = JumpLaw::point_masses({{-0.1, 0.3}, {0.15, 0.7}});
  }
  return MarketModel(TimeGrid::uniform(1.0, nodes), CoefficientPath::constant(nodes, 0.02, mu, sigma), jumps);
}

void BM_SolvePower1d(benchmark::State& state) {
  const auto model = jump_market(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(solve_power_1d(model, UtilitySpec::equal(0.5), 1.0).J_star);
}
BENCHMARK(BM_SolvePower1d)->Arg(129)->Arg(1025);

void BM_SolvePowerMulti(benchmark::State& state) {
  const auto model = jump_market(257, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_power_equal(model, UtilitySpec::equal(0.5), 1.0).J_star);
}
BENCHMARK(BM_SolvePowerMulti)->Arg(2)->Arg(4);

void BM_AdjustedVar(benchmark::State& state) {
  // Rare negative jumps keep epsilon_T below beta.
  const auto model = jump_market(static_cast<std::size_t>(state.range(0)), 1, 0.1);
  const RiskSpec risk{RiskKind::VaR, 0.05, 0.1, NegJumpMode::ExactThinning};
  for (auto _ : state) benchmark::DoNotOptimize(adjusted_solve(model, risk, UtilitySpec::equal(1.0), 1.0).J_star);
}
BENCHMARK(BM_AdjustedVar)->Arg(129)->Arg(1025);

}  // namespace
