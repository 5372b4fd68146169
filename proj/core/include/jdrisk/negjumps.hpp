#pragma once

#include "jdrisk/constrained.hpp"
#include "jdrisk/market.hpp"
#include "jdrisk/riskmetrics.hpp"

namespace jdrisk {

struct NegJumpAdjustment {
  double epsilon_T = 0.0;
  double beta_hat = 0.0;
  NegJumpMode method = NegJumpMode::ExactThinning;
};

// Probability of at least one negative jump on [0, t]. ExactThinning is the
// Poisson-thinning value; PaperFormula is the closed form printed alongside
// the adjustment and is kept for comparison.
double epsilon_t(const JumpSpec& jumps, double t, NegJumpMode method = NegJumpMode::ExactThinning);

double beta_hat(double beta, double epsilon);
double F_hat(double u, double beta, double epsilon_T);

NegJumpAdjustment negjump_adjustment(const MarketModel& model, const RiskSpec& risk);

// Level used by the transformed constraints: plain under nonnegative jumps,
// adjusted otherwise. Throws NegativeJumpsPresent when adjustment is off.
RiskLevel risk_level(const MarketModel& model, const RiskSpec& risk);

// Re-runs the matching constrained solver at the adjusted level.
SolveReport adjusted_solve(const MarketModel& model, const RiskSpec& risk, const UtilitySpec& utility, double x,
                           bool force = false);

}  // namespace jdrisk
