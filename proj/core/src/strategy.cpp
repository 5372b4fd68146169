#include "jdrisk/strategy.hpp"

#include <cmath>
#include <string>

#include "jdrisk/error.hpp"
#include "jdrisk/quadrature.hpp"

namespace jdrisk {

Strategy Strategy::from_pi(const MarketModel& model, std::vector<Eigen::VectorXd> pi, std::vector<double> v) {
  const std::size_t n = model.nodes();
  if (pi.size() != n || v.size() != n) throw Error(ErrorCode::InvalidStrategy, "strategy length differs from grid");
  Strategy s;
  s.y.resize(n);
  for (std::size_t k = 0; k < n; ++k) s.y[k] = model.coeffs().sigma[k].transpose() * pi[k];
  s.pi = std::move(pi);
  s.V = cumulative_trapezoid(model.grid().nodes(), v);
  s.v = std::move(v);
  return s;
}

Strategy Strategy::from_y(const MarketModel& model, std::vector<Eigen::VectorXd> y, std::vector<double> v) {
  const std::size_t n = model.nodes();
  if (y.size() != n || v.size() != n) throw Error(ErrorCode::InvalidStrategy, "strategy length differs from grid");
  Strategy s;
  s.pi.resize(n);
  for (std::size_t k = 0; k < n; ++k) s.pi[k] = model.sigma_inverse(k).transpose() * y[k];
  s.y = std::move(y);
  s.V = cumulative_trapezoid(model.grid().nodes(), v);
  s.v = std::move(v);
  return s;
}

Strategy Strategy::zero(const MarketModel& model) {
  return from_pi(model, std::vector<Eigen::VectorXd>(model.nodes(), Eigen::VectorXd::Zero(model.dimension())),
                 std::vector<double>(model.nodes(), 0.0));
}

void Strategy::validate(const MarketModel& model, double tol) const {
  const std::size_t n = model.nodes();
  if (y.size() != n || pi.size() != n || v.size() != n || V.size() != n)
    throw Error(ErrorCode::InvalidStrategy, "strategy length differs from grid");
  for (std::size_t k = 0; k < n; ++k) {
    if (pi[k].size() != model.dimension() || y[k].size() != model.dimension())
      throw Error(ErrorCode::InvalidStrategy, "strategy dimension differs from market");
    if ((pi[k].array() < -tol).any() || (pi[k].array() > 1.0 + tol).any())
      throw Error(ErrorCode::InvalidStrategy, "pi leaves [0,1] at node " + std::to_string(k));
    if (!(v[k] >= 0.0) || !std::isfinite(v[k]))
      throw Error(ErrorCode::InvalidStrategy, "consumption rate must be nonnegative");
    const Eigen::VectorXd y_check = model.coeffs().sigma[k].transpose() * pi[k];
    if ((y_check - y[k]).cwiseAbs().maxCoeff() > tol)
      throw Error(ErrorCode::InvalidStrategy, "y differs from sigma' pi at node " + std::to_string(k));
  }
}

double V_integral(const MarketModel& model, const Strategy& s, double t) { return s.V.at(model.grid().index_of(t)); }

double inner_product_path(const MarketModel& model, const Strategy& s, double t) {
  return y_theta_hat_path(model, s).at(model.grid().index_of(t));
}

std::vector<double> y_norm_squared_path(const MarketModel& model, const Strategy& s) {
  std::vector<double> f(model.nodes());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = s.y[k].squaredNorm();
  return cumulative_trapezoid(model.grid().nodes(), f);
}

std::vector<double> y_theta_hat_path(const MarketModel& model, const Strategy& s) {
  std::vector<double> f(model.nodes());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = s.y[k].dot(model.theta_hat(k));
  return cumulative_trapezoid(model.grid().nodes(), f);
}

std::vector<double> y_theta_path(const MarketModel& model, const Strategy& s) {
  std::vector<double> f(model.nodes());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = s.y[k].dot(model.theta(k));
  return cumulative_trapezoid(model.grid().nodes(), f);
}

std::vector<double> jump_K_path(const MarketModel& model, const Strategy& s, double gamma) {
  std::vector<double> f(model.nodes(), 0.0);
  for (std::size_t k = 0; k < f.size(); ++k)
    for (int j = 0; j < model.dimension(); ++j) f[k] += K_transform(model.jumps(), j, s.pi[k][j], gamma);
  return cumulative_trapezoid(model.grid().nodes(), f);
}

double l2_inner(const TimeGrid& grid, const std::vector<Eigen::VectorXd>& f, const std::vector<Eigen::VectorXd>& g) {
  std::vector<double> h(grid.size());
  for (std::size_t k = 0; k < h.size(); ++k) h[k] = f[k].dot(g[k]);
  return trapezoid(grid.nodes(), h);
}

double l2_norm(const TimeGrid& grid, const std::vector<Eigen::VectorXd>& f) {
  return std::sqrt(std::max(0.0, l2_inner(grid, f, f)));
}

}  // namespace jdrisk
