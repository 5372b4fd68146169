#pragma once

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jdrisk/market.hpp"
#include "jdrisk/riskmetrics.hpp"
#include "jdrisk/strategy.hpp"
#include "jdrisk/unconstrained.hpp"

namespace jdrisk {

//! Confidence level entering the transformed constraints. The plain level
//! uses q_beta and F_beta; the negative-jump adjustment swaps in beta_hat and
//! scales F.
struct RiskLevel {
  double beta_eff = 0.05;
  double es_scale = 1.0;

  static RiskLevel plain(double beta) { return {beta, 1.0}; }
  double q() const { return normal_quantile(beta_eff); }
  double F(double u) const { return es_scale * F_beta(u, beta_eff); }
};

struct ConstraintCertificate {
  RiskKind kind = RiskKind::VaR;
  bool active = true;
  bool precondition_ok = true;
  double condition_lhs = 0.0;
  double condition_rhs = 0.0;
  double rho_star = std::numeric_limits<double>::quiet_NaN();
  std::pair<double, double> kappa_range{0.0, 1.0};
  double chi = 1.0;
  double l_star = std::numeric_limits<double>::quiet_NaN();
  double m_hat_theta = 0.0;
  std::string reason;
  std::optional<SolveReport> solution;
};

struct DiffGammaReport {
  double consumed_fraction = 0.0;  // 1 - exp(-V_T), equals kappa at the optimum
  std::vector<double> eta_grid;
  std::vector<double> rho_eta;
  std::vector<double> M_hat_curve;
  double M_hat_argmax = 0.0;
  double dlogM_inf = 0.0;
  Strategy strategy;
  double J_upper = 0.0;
  double J_attained = 0.0;
  double condition_lhs = 0.0;
  double condition_rhs = 0.0;
  bool condition_ok = false;
  std::vector<std::string> flags;
};

// Per-node slack of the transformed VaR constraint
// -||y||_t^2/2 + q ||y||_t - V_t + (y, theta_hat)_t - ln(1 - kappa).
std::vector<double> var_constraint_slack(const Strategy& s, const MarketModel& model, const RiskLevel& level,
                                         double kappa);
// Per-node slack L_t - ln(1 - kappa) of the transformed ES constraint.
std::vector<double> es_constraint_slack(const Strategy& s, const MarketModel& model, const RiskLevel& level,
                                        double kappa);

double transformed_var_constraint(const Strategy& s, const MarketModel& model, const RiskSpec& risk, double t);
double transformed_es_constraint(const Strategy& s, const MarketModel& model, const RiskSpec& risk, double t);

// K_T = (theta, sigma^{-1} xi_lambda)_T / ||theta||_T
double jump_drift_K(const MarketModel& model);
// Admissible kappa interval (lower, 1) for the gamma = 1 VaR theorem.
std::pair<double, double> kappa_range_var_gamma1(const MarketModel& model, const RiskLevel& level);

double rho_var_gamma1(const MarketModel& model, const RiskSpec& risk);
double rho_var_gamma1(const MarketModel& model, const RiskLevel& level, double kappa);
double rho_es_gamma1(const MarketModel& model, const RiskSpec& risk);
double rho_es_gamma1(const MarketModel& model, const RiskLevel& level, double kappa, bool force = false);

// Largest radius rho with y = theta rho / ||theta||_T keeping pi in [0,1]^d and
// ||y||_T below sqrt(T) ||sigma||_T.
double rho_cap_gamma1(const MarketModel& model);

SolveReport solve_var_gamma1(const MarketModel& model, const RiskSpec& risk, double x, bool force = false);
SolveReport solve_var_gamma1(const MarketModel& model, const RiskLevel& level, double kappa, double x,
                             bool force = false);
SolveReport solve_es_gamma1(const MarketModel& model, const RiskSpec& risk, double x, bool force = false);
SolveReport solve_es_gamma1(const MarketModel& model, const RiskLevel& level, double kappa, double x,
                            bool force = false);

ConstraintCertificate certify_var_gamma(const MarketModel& model, const UtilitySpec& utility, const RiskSpec& risk,
                                        double x = 1.0);
ConstraintCertificate certify_es_gamma(const MarketModel& model, const UtilitySpec& utility, const RiskSpec& risk,
                                       double x = 1.0);
// Certificates for an already solved unconstrained report at a given level.
ConstraintCertificate certify_var(const MarketModel& model, const UtilitySpec& utility, const RiskLevel& level,
                                  double kappa, SolveReport unconstrained);
ConstraintCertificate certify_es(const MarketModel& model, const UtilitySpec& utility, const RiskLevel& level,
                                 double kappa, SolveReport unconstrained);

// M_hat(x, eta) = x^g1 eta^g1 ||g1_hat||_{q1,T} + x^g2 (1 - eta)^g2 g2_hat(T)
double M_hat(const MarketModel& model, const UtilitySpec& utility, double x, double eta);
double M_hat_argmax(const MarketModel& model, const UtilitySpec& utility, double x);

DiffGammaReport solve_diff_gamma(const MarketModel& model, const UtilitySpec& utility, const RiskSpec& risk, double x,
                                 bool force = false);
DiffGammaReport solve_diff_gamma(const MarketModel& model, const UtilitySpec& utility, RiskKind kind,
                                 const RiskLevel& level, double kappa, double x, bool force = false);

SolveReport solve_no_consumption(const MarketModel& model, const UtilitySpec& utility, double x);
ConstraintCertificate certify_no_consumption(const MarketModel& model, const UtilitySpec& utility,
                                             const RiskSpec& risk, double x = 1.0);

}  // namespace jdrisk
