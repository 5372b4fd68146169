#include "jdrisk/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "jdrisk/error.hpp"

namespace jdrisk {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SingularSigma: return "SingularSigma";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::UnsupportedSupport: return "UnsupportedSupport";
    case ErrorCode::OffGrid: return "OffGrid";
    case ErrorCode::MomentDiverges: return "MomentDiverges";
    case ErrorCode::DriftBelowRate: return "DriftBelowRate";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::AssumptionJViolated: return "AssumptionJViolated";
    case ErrorCode::ThetaHatNegative: return "ThetaHatNegative";
    case ErrorCode::KappaOutOfRange: return "KappaOutOfRange";
    case ErrorCode::ConditionViolated: return "ConditionViolated";
    case ErrorCode::EpsilonTooLarge: return "EpsilonTooLarge";
    case ErrorCode::NegativeJumpsPresent: return "NegativeJumpsPresent";
    case ErrorCode::InvalidStrategy: return "InvalidStrategy";
    case ErrorCode::EmptyFeasibleSet: return "EmptyFeasibleSet";
    case ErrorCode::OutOfRange: return "OutOfRange";
  }
  return "Unknown";
}

GaussLegendre::GaussLegendre(int n) : nodes(n), weights(n) {
  if (n < 1) throw Error(ErrorCode::InvalidInput, "Gauss-Legendre order must be positive");
  // Newton iteration on P_n from the Chebyshev-like initial guess; nodes are
  // symmetric so only half are computed.
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

std::vector<double> cumulative_trapezoid(std::span<const double> t, std::span<const double> f) {
  if (t.size() != f.size()) throw Error(ErrorCode::InvalidInput, "trapezoid size mismatch");
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t k = 1; k < t.size(); ++k)
    out[k] = out[k - 1] + 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
  return out;
}

double trapezoid(std::span<const double> t, std::span<const double> f) {
  if (t.empty()) return 0.0;
  return cumulative_trapezoid(t, f).back();
}

}  // namespace jdrisk
