#include <benchmark/benchmark.h>

#include "jdrisk/simulate.hpp"

namespace {

using namespace jdrisk;

MarketModel one_asset(std::size_t nodes) {
  JumpSpec jumps = JumpSpec::none(1);
  jumps.assets[0].lambda = 2.0;
  jumps.assets[0].law = JumpLaw::point_masses({{-0.3, 0.4}, {0.5, 0.6}});
  return MarketModel(TimeGrid::uniform(1.0, nodes),
                     CoefficientPath::constant(nodes, 0.02, Eigen::VectorXd::Constant(1, 0.07),
                                               Eigen::MatrixXd::Constant(1, 1, 0.2)),
                     jumps);
}

void BM_SimulateStream(benchmark::State& state) {
  const auto model = one_asset(129);
  const auto s = Strategy::from_pi(model, std::vector<Eigen::VectorXd>(129, Eigen::VectorXd::Constant(1, 0.5)),
                                   std::vector<double>(129, 0.1));
  const auto paths = static_cast<std::size_t>(state.range(0));
  double acc = 0.0;
  for (auto _ : state)
    simulate_stream(model, s, 1.0, paths, 1, [&](std::size_t, std::span<const double> lw) { acc += lw[0]; });
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(paths) * 129);
}
BENCHMARK(BM_SimulateStream)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_DrawJumps(benchmark::State& state) {
  const auto model = one_asset(129);
  for (auto _ : state) benchmark::DoNotOptimize(draw_jumps(model, 100000, 1).events.size());
}
BENCHMARK(BM_DrawJumps)->Unit(benchmark::kMillisecond);

}  // namespace
