#pragma once

#include <span>
#include <utility>
#include <vector>

namespace jdrisk {

enum class RiskKind { VaR, ES };
enum class NegJumpMode { Off, PaperFormula, ExactThinning };

struct RiskSpec {
  RiskKind kind = RiskKind::VaR;
  double beta = 0.05;
  double kappa = 0.1;
  NegJumpMode negjump_mode = NegJumpMode::ExactThinning;

  // Throws InvalidInput unless 0 < beta <= 1/2 and 0 < kappa < 1.
  void validate() const;
};

double normal_pdf(double z);
double normal_cdf(double z);
// Upper tail 1 - Phi(z) without cancellation.
double normal_sf(double z);
double log_normal_sf(double z);
double normal_quantile(double beta);

// Lower beta-quantile and expected shortfall of the stochastic exponential
// with quadratic variation s^2.
double quantile_stoch_exp(double y_norm, double beta);
double es_stoch_exp(double y_norm, double beta);

// F_beta(u) = ln(Phi_bar(u) / beta)
double F_beta(double u, double beta);

std::pair<double, double> gaussian_tail_bounds(double z);

// Lower empirical quantile: order statistic at index ceil(beta n), 1-based.
std::size_t order_statistic_index(double beta, std::size_t n);
double empirical_quantile(std::span<const double> sample, double beta);
// Mean of the sample values at or below the empirical quantile.
double empirical_es(std::span<const double> sample, double beta);

}  // namespace jdrisk
