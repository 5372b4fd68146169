#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "jdrisk/constrained.hpp"
#include "jdrisk/market.hpp"
#include "jdrisk/riskmetrics.hpp"
#include "jdrisk/strategy.hpp"

namespace jdrisk {

//! Jump events of an ensemble bucketed by the grid interval they fall in.
struct JumpEvents {
  std::vector<std::size_t> offsets;  // per interval, into events
  struct Event {
    std::uint32_t path;
    std::uint32_t asset;
    double size;
  };
  std::vector<Event> events;
  std::vector<std::uint32_t> counts;  // n_paths x d totals on [0, T]
};

// Poisson counts with exact uniform jump times and jump sizes from F^j.
JumpEvents draw_jumps(const MarketModel& model, std::size_t n_paths, std::uint64_t seed);

using NodeVisitor = std::function<void(std::size_t node, std::span<const double> log_wealth)>;

// Node-major simulation of ln X_t for every path. Memory is O(n_paths) plus
// the jump events, so million-path runs stay cheap.
void simulate_stream(const MarketModel& model, const Strategy& strategy, double x, std::size_t n_paths,
                     std::uint64_t seed, const NodeVisitor& visit);

struct PathEnsemble {
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> nodes;        // recorded grid nodes
  std::vector<double> wealth;            // node-major: wealth[r * n_paths + i]
  std::vector<std::uint32_t> jump_counts;  // n_paths x d

  std::span<const double> at_record(std::size_t r) const {
    return {wealth.data() + r * n_paths, n_paths};
  }
  // Wealth at a grid node; throws OffGrid if the node was not recorded.
  std::span<const double> at_node(std::size_t node) const;
};

// Records every node unless record_nodes is given.
PathEnsemble simulate(const MarketModel& model, const Strategy& strategy, double x, std::size_t n_paths,
                      std::uint64_t seed, std::vector<std::size_t> record_nodes = {});

double empirical_var(const PathEnsemble& ens, const MarketModel& model, double x, double beta, std::size_t node);
double empirical_es(const PathEnsemble& ens, const MarketModel& model, double x, double beta, std::size_t node);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// MC estimate of E[int c^gamma1 dt + X_T^gamma2]; needs every node recorded.
Estimate estimate_cost(const PathEnsemble& ens, const MarketModel& model, const Strategy& strategy,
                       const UtilitySpec& utility);
// Streaming variant for large path counts.
Estimate estimate_cost(const MarketModel& model, const Strategy& strategy, const UtilitySpec& utility, double x,
                       std::size_t n_paths, std::uint64_t seed);

// Indices (l, u), 1-based, with P(X_(l) <= q_beta <= X_(u)) >= confidence.
std::pair<std::size_t, std::size_t> order_statistic_ci(std::size_t n, double beta, double confidence);

struct RiskConstraint {
  RiskKind kind = RiskKind::VaR;
  RiskLevel level;
  double kappa = 0.1;
};

struct ConsumptionShape {
  std::vector<double> v;
  std::vector<double> V;
};

struct GridOracleResult {
  double pi = 0.0;
  double scale = 0.0;
  double J = 0.0;
  std::size_t evaluated = 0;
  std::size_t feasible = 0;
  Strategy strategy;
};

// Exhaustive search over constant pi (same fraction in every asset) and
// scaled consumption shapes, evaluated with the closed-form cost.
GridOracleResult grid_oracle(const MarketModel& model, const UtilitySpec& utility,
                             const std::optional<RiskConstraint>& risk, double x, const std::vector<double>& pi_grid,
                             const std::vector<double>& scale_grid, const ConsumptionShape& shape);

// Closed-form profile Risk_t / (kappa x e^{R_t}) ignoring jumps.
std::vector<double> constraint_profile(const MarketModel& model, const Strategy& strategy, RiskKind kind,
                                       double beta, double kappa);

struct ProfileMC {
  std::vector<double> ratio;      // point estimate per node
  std::vector<double> ratio_low;  // favourable end of the confidence band
  std::vector<double> ratio_high;
};

// Empirical profile over n_paths; VaR bands are exact order-statistic
// intervals at `confidence`, ES bands are +-z standard errors.
ProfileMC constraint_profile_mc(const MarketModel& model, const Strategy& strategy, RiskKind kind, double beta,
                                double kappa, double x, std::size_t n_paths, std::uint64_t seed,
                                double confidence = 0.99, double z = 3.0);

}  // namespace jdrisk
