#pragma once

#include <span>
#include <vector>

namespace jdrisk {

//! Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int n);

  // Maps the rule onto [a, b].
  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(mid + half * nodes[i]);
    return half * sum;
  }
};

// Cumulative trapezoid integral of samples f on the abscissae t; result[0] = 0.
std::vector<double> cumulative_trapezoid(std::span<const double> t, std::span<const double> f);

double trapezoid(std::span<const double> t, std::span<const double> f);

}  // namespace jdrisk
