#include "jdrisk/negjumps.hpp"

#include <cmath>

#include "jdrisk/error.hpp"

namespace jdrisk {

double epsilon_t(const JumpSpec& jumps, double t, NegJumpMode method) {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidInput, "epsilon_t needs t >= 0");
  if (method == NegJumpMode::Off) return 0.0;
  bool any = false;
  double log_none = 0.0;
  double paper = 1.0;
  for (const auto& a : jumps.assets) {
    const double p_neg = a.lambda > 0.0 ? a.law.mass_below(0.0) : 0.0;
    if (p_neg > 0.0) any = true;
    log_none += -a.lambda * t * p_neg;
    paper *= -std::expm1(-a.lambda * t) * p_neg;
  }
  if (!any) return 0.0;
  if (method == NegJumpMode::PaperFormula) return paper;
  return -std::expm1(log_none);
}

double beta_hat(double beta, double epsilon) {
  if (!(epsilon >= 0.0) || epsilon >= beta)
    throw Error(ErrorCode::EpsilonTooLarge, "negative-jump probability must stay below beta");
  return (beta - epsilon) / (1.0 - epsilon);
}

double F_hat(double u, double beta, double epsilon_T) {
  return (beta - epsilon_T) / beta * F_beta(u, beta_hat(beta, epsilon_T));
}

NegJumpAdjustment negjump_adjustment(const MarketModel& model, const RiskSpec& risk) {
  NegJumpAdjustment adj;
  adj.method = risk.negjump_mode;
  adj.epsilon_T = epsilon_t(model.jumps(), model.grid().horizon(), risk.negjump_mode);
  adj.beta_hat = beta_hat(risk.beta, adj.epsilon_T);
  return adj;
}

RiskLevel risk_level(const MarketModel& model, const RiskSpec& risk) {
  risk.validate();
  if (model.jumps().nonnegative()) return RiskLevel::plain(risk.beta);
  if (risk.negjump_mode == NegJumpMode::Off)
    throw Error(ErrorCode::NegativeJumpsPresent, "negative jumps present and adjustment disabled");
  const auto adj = negjump_adjustment(model, risk);
  return {adj.beta_hat, (risk.beta - adj.epsilon_T) / risk.beta};
}

SolveReport adjusted_solve(const MarketModel& model, const RiskSpec& risk, const UtilitySpec& utility, double x,
                           bool force) {
  const RiskLevel level = risk_level(model, risk);
  if (utility.gamma1 == 1.0 && utility.gamma2 == 1.0) {
    return risk.kind == RiskKind::VaR ? solve_var_gamma1(model, level, risk.kappa, x, force)
                                      : solve_es_gamma1(model, level, risk.kappa, x, force);
  }
  if (utility.is_equal()) {
    auto cert = risk.kind == RiskKind::VaR
                    ? certify_var(model, utility, level, risk.kappa, solve_power_equal(model, utility, x))
                    : certify_es(model, utility, level, risk.kappa, solve_power_equal(model, utility, x));
    if (cert.active && !force)
      throw Error(ErrorCode::ConditionViolated, "constraint may bind: " + cert.reason);
    auto rep = std::move(*cert.solution);
    if (cert.active) rep.flags.push_back("ConstraintNotCertified");
    return rep;
  }
  throw Error(ErrorCode::InvalidInput, "adjusted_solve covers gamma = 1 and equal-gamma problems");
}

}  // namespace jdrisk
