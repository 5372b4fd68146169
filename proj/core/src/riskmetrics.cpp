#include "jdrisk/riskmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "jdrisk/error.hpp"

namespace jdrisk {

void RiskSpec::validate() const {
  if (!(beta > 0.0 && beta <= 0.5)) throw Error(ErrorCode::InvalidInput, "beta must lie in (0, 1/2]");
  if (!(kappa > 0.0 && kappa < 1.0)) throw Error(ErrorCode::InvalidInput, "kappa must lie in (0, 1)");
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double normal_quantile(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw Error(ErrorCode::OutOfRange, "quantile level must lie in (0, 1)");
  if (beta == 0.5) return 0.0;
  // Acklam's rational approximation, relative error about 1e-9.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double plow = 0.02425;
  double x;
  if (beta < plow) {
    const double q = std::sqrt(-2.0 * std::log(beta));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (beta <= 1.0 - plow) {
    const double q = beta - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-beta));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley step on Phi(x) - beta; the tail side uses the survival
  // function so the residual keeps its relative accuracy.
  const double e = x < 0.0 ? normal_cdf(x) - beta : (1.0 - beta) - normal_sf(x);
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double quantile_stoch_exp(double y_norm, double beta) {
  return std::exp(-0.5 * y_norm * y_norm + normal_quantile(beta) * y_norm);
}

double es_stoch_exp(double y_norm, double beta) {
  return normal_sf(std::abs(normal_quantile(beta)) + y_norm) / beta;
}

double log_normal_sf(double z) {
  if (z < 30.0) return std::log(normal_sf(z));
  // Asymptotic series; erfc underflows long before the series loses accuracy.
  const double iz2 = 1.0 / (z * z);
  return -0.5 * z * z - std::log(z * std::sqrt(2.0 * std::numbers::pi)) +
         std::log1p(-iz2 * (1.0 - 3.0 * iz2 * (1.0 - 5.0 * iz2)));
}

double F_beta(double u, double beta) { return log_normal_sf(u) - std::log(beta); }

std::pair<double, double> gaussian_tail_bounds(double z) {
  if (!(z > 0.0)) throw Error(ErrorCode::OutOfRange, "tail bounds need z > 0");
  const double phi = normal_pdf(z);
  return {(1.0 / z - 1.0 / (z * z * z)) * phi, phi / z};
}

std::size_t order_statistic_index(double beta, std::size_t n) {
  const auto k = static_cast<std::size_t>(std::ceil(beta * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(k, 1, n);
}

double empirical_quantile(std::span<const double> sample, double beta) {
  if (sample.empty()) throw Error(ErrorCode::InvalidInput, "empty sample");
  std::vector<double> s(sample.begin(), sample.end());
  const std::size_t k = order_statistic_index(beta, s.size()) - 1;
  std::nth_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k), s.end());
  return s[k];
}

double empirical_es(std::span<const double> sample, double beta) {
  if (sample.empty()) throw Error(ErrorCode::InvalidInput, "empty sample");
  std::vector<double> s(sample.begin(), sample.end());
  const std::size_t k = order_statistic_index(beta, s.size());
  std::nth_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k - 1), s.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += s[i];
  return sum / static_cast<double>(k);
}

}  // namespace jdrisk
