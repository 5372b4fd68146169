#include "jdrisk/unconstrained.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "jdrisk/error.hpp"
#include "jdrisk/quadrature.hpp"

namespace jdrisk {

bool SolveReport::has_flag(const std::string& f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

namespace {

void require_equal_power(const UtilitySpec& utility) {
  if (!utility.is_equal() || !(utility.gamma1 > 0.0 && utility.gamma1 < 1.0))
    throw Error(ErrorCode::InvalidInput, "solver needs gamma1 = gamma2 in (0, 1)");
}

void add_flag(SolveReport& rep, const std::string& f) {
  if (!rep.has_flag(f)) rep.flags.push_back(f);
}

// Scaled Bernoulli quantities: w = g^q e^{-m}, S(t) = w(T) + int_t^T w.
struct BernoulliParts {
  std::vector<double> w;
  std::vector<double> S;
};

BernoulliParts bernoulli_parts(const TimeGrid& grid, const std::vector<double>& h_star, double gamma) {
  if (h_star.size() != grid.size()) throw Error(ErrorCode::InvalidInput, "h* length differs from grid");
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorCode::InvalidInput, "gamma must lie in (0, 1)");
  const double q = 1.0 / (1.0 - gamma);
  const auto H = cumulative_trapezoid(grid.nodes(), h_star);
  double m = -std::numeric_limits<double>::infinity();
  for (double h : H) m = std::max(m, q * h);
  BernoulliParts p;
  p.w.resize(H.size());
  for (std::size_t k = 0; k < H.size(); ++k) p.w[k] = std::exp(q * H[k] - m);
  const auto I = cumulative_trapezoid(grid.nodes(), p.w);
  p.S.resize(H.size());
  for (std::size_t k = 0; k < H.size(); ++k) p.S[k] = p.w.back() + (I.back() - I[k]);
  return p;
}

void fill_bernoulli(SolveReport& rep, const MarketModel& model, double gamma, double x) {
  const auto& grid = model.grid();
  const auto parts = bernoulli_parts(grid, rep.h_star, gamma);
  rep.g = g_path(grid, rep.h_star);
  rep.rho.resize(grid.size());
  std::vector<double> v(grid.size()), V(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    rep.rho[k] = std::pow(parts.S[k] / parts.w[k], 1.0 - gamma);
    v[k] = parts.w[k] / parts.S[k];
    V[k] = std::log(parts.S[0] / parts.S[k]);
  }
  rep.strategy.v = std::move(v);
  rep.strategy.V = std::move(V);
  rep.chi = parts.w.back() / parts.S[0];
  rep.J_star = std::pow(x, gamma) * rep.rho[0];
}

// dQ^j/dpi = (gamma - 1) lambda E[(1 + pi z)^(gamma - 2) z^2]
double Q_derivative(const JumpSpec& jumps, int asset, double pi, double gamma) {
  const auto& a = jumps.assets[static_cast<std::size_t>(asset)];
  if (a.lambda == 0.0) return 0.0;
  return (gamma - 1.0) * a.lambda * a.law.expect([&](double z) { return std::pow(1.0 + pi * z, gamma - 2.0) * z * z; });
}

// Maximises the strictly concave G(t, .) over [0,1]^d by active-set projected
// Newton with backtracking, starting from pi.
Eigen::VectorXd box_newton(const MarketModel& model, std::size_t k, Eigen::VectorXd pi, double gamma) {
  const int d = model.dimension();
  const Eigen::MatrixXd& sig = model.coeffs().sigma[k];
  const Eigen::MatrixXd base_hess = (gamma - 1.0) * sig * sig.transpose();
  double f = power_objective(model, k, pi, gamma);
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd grad = sig * (model.theta(k) + (gamma - 1.0) * (sig.transpose() * pi));
    Eigen::MatrixXd hess = base_hess;
    for (int j = 0; j < d; ++j) {
      grad[j] += Q_transform(model.jumps(), j, pi[j], gamma);
      hess(j, j) += Q_derivative(model.jumps(), j, pi[j], gamma);
    }
    std::vector<int> free;
    for (int j = 0; j < d; ++j)
      if (!((pi[j] <= 0.0 && grad[j] <= 0.0) || (pi[j] >= 1.0 && grad[j] >= 0.0))) free.push_back(j);
    if (free.empty()) break;
    const auto nf = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd hf(nf, nf);
    Eigen::VectorXd gf(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      gf[a] = grad[free[a]];
      for (Eigen::Index b = 0; b < nf; ++b) hf(a, b) = hess(free[a], free[b]);
    }
    const Eigen::VectorXd step = hf.ldlt().solve(-gf);
    if (step.cwiseAbs().maxCoeff() < 1e-15) break;
    double t = 1.0;
    Eigen::VectorXd trial = pi;
    double ft = f;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      trial = pi;
      for (Eigen::Index a = 0; a < nf; ++a) trial[free[a]] = std::clamp(pi[free[a]] + t * step[a], 0.0, 1.0);
      ft = power_objective(model, k, trial, gamma);
      if (ft >= f) break;
    }
    if (!(ft >= f)) break;
    const double moved = (trial - pi).cwiseAbs().maxCoeff();
    pi = trial;
    f = ft;
    if (moved < 1e-15) break;
  }
  return pi;
}

}  // namespace

SolveReport solve_linear(const MarketModel& model, double x) {
  const auto& grid = model.grid();
  const auto& c = model.coeffs();
  const int d = model.dimension();
  std::vector<Eigen::VectorXd> excess(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    excess[k] = c.mu[k] - c.r[k] * Eigen::VectorXd::Ones(d);
    if ((excess[k].array() < 0.0).any())
      throw Error(ErrorCode::DriftBelowRate, "mu below r at node " + std::to_string(k));
  }
  const double norm = l2_norm(grid, excess);
  const double T = grid.horizon();
  std::vector<Eigen::VectorXd> pi(grid.size(), Eigen::VectorXd::Zero(d));
  if (norm > 0.0)
    for (std::size_t k = 0; k < grid.size(); ++k) pi[k] = excess[k] * std::sqrt(T) / norm;
  SolveReport rep;
  for (const auto& p : pi)
    if ((p.array() > 1.0 + 1e-12).any()) add_flag(rep, "PiOutsideBox");
  rep.strategy = Strategy::from_pi(model, std::move(pi), std::vector<double>(grid.size(), 0.0));
  rep.J_star = x * std::exp(model.R().back() + std::sqrt(T) * norm);
  rep.h_star.assign(grid.size(), 0.0);
  rep.g.assign(grid.size(), 1.0);
  rep.rho.assign(grid.size(), 1.0);
  rep.chi = 1.0;
  return rep;
}

double eta_1d(const MarketModel& model, std::size_t node, double pi, double gamma) {
  if (model.dimension() != 1) throw Error(ErrorCode::InvalidInput, "eta_1d needs a one-asset market");
  const auto& c = model.coeffs();
  const double s = c.sigma[node](0, 0);
  return c.mu[node][0] - c.r[node] + (gamma - 1.0) * s * s * pi + Q_transform(model.jumps(), 0, pi, gamma);
}

double power_objective(const MarketModel& model, std::size_t node, const Eigen::VectorXd& pi, double gamma) {
  const auto& c = model.coeffs();
  const Eigen::VectorXd y = c.sigma[node].transpose() * pi;
  double val = gamma * (c.r[node] + y.dot(model.theta(node))) + 0.5 * gamma * (gamma - 1.0) * y.squaredNorm();
  for (int j = 0; j < model.dimension(); ++j) val += K_transform(model.jumps(), j, pi[j], gamma);
  return val;
}

SolveReport solve_power_1d(const MarketModel& model, const UtilitySpec& utility, double x) {
  require_equal_power(utility);
  if (model.dimension() != 1) throw Error(ErrorCode::InvalidInput, "solve_power_1d needs a one-asset market");
  const double gamma = utility.gamma1;
  const std::size_t n = model.nodes();
  SolveReport rep;
  std::vector<Eigen::VectorXd> pi(n, Eigen::VectorXd::Zero(1));
  rep.h_star.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    double p;
    const double e0 = eta_1d(model, k, 0.0, gamma);
    const double e1 = eta_1d(model, k, 1.0, gamma);
    if (e0 <= 0.0) {
      p = 0.0;
      if (e0 < 0.0) add_flag(rep, "NoInteriorRoot");
    } else if (e1 >= 0.0) {
      p = 1.0;
      if (e1 > 0.0) add_flag(rep, "NoInteriorRoot");
    } else {
      double lo = 0.0, hi = 1.0;
      while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (eta_1d(model, k, mid, gamma) > 0.0 ? lo : hi) = mid;
      }
      p = 0.5 * (lo + hi);
      rep.foc_residual = std::max(rep.foc_residual, std::abs(eta_1d(model, k, p, gamma)));
    }
    pi[k][0] = p;
    rep.h_star[k] = power_objective(model, k, pi[k], gamma);
  }
  rep.strategy = Strategy::from_pi(model, std::move(pi), std::vector<double>(n, 0.0));
  fill_bernoulli(rep, model, gamma, x);
  return rep;
}

SolveReport solve_power_equal(const MarketModel& model, const UtilitySpec& utility, double x,
                              const FixedPointOptions& options) {
  require_equal_power(utility);
  const double gamma = utility.gamma1;
  const double q = 1.0 / (1.0 - gamma);
  const int d = model.dimension();
  const std::size_t n = model.nodes();
  const auto& c = model.coeffs();
  SolveReport rep;
  std::vector<Eigen::VectorXd> ys(n);
  rep.h_star.resize(n);

  for (std::size_t k = 0; k < n; ++k) {
    const Eigen::MatrixXd& eps = model.sigma_inverse(k);
    const Eigen::MatrixXd sig_t = c.sigma[k].transpose();
    auto project = [&](const Eigen::VectorXd& y, Eigen::VectorXd& pi) {
      pi = (eps.transpose() * y).cwiseMax(0.0).cwiseMin(1.0);
      return Eigen::VectorXd(sig_t * pi);
    };
    auto Qvec = [&](const Eigen::VectorXd& pi) {
      Eigen::VectorXd Q(d);
      for (int j = 0; j < d; ++j) Q[j] = Q_transform(model.jumps(), j, pi[j], gamma);
      return Q;
    };
    Eigen::VectorXd pi;
    Eigen::VectorXd y = project(q * model.theta(k), pi);
    bool converged = false;
    for (int it = 0; it < options.max_iterations; ++it) {
      const Eigen::VectorXd target = q * (model.theta(k) + eps * Qvec(pi));
      Eigen::VectorXd next_pi;
      const Eigen::VectorXd next =
          project((1.0 - options.damping) * y + options.damping * target, next_pi);
      const double step = (next - y).cwiseAbs().maxCoeff();
      y = next;
      pi = next_pi;
      if (step < options.tolerance) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw Error(ErrorCode::NoConvergence, "fixed point did not converge at node " + std::to_string(k));

    // Clipping the fixed point is only optimal on the box when the clipped
    // coordinates decouple; finish with projected Newton on the concave G.
    if (!((pi.array() > 0.0) && (pi.array() < 1.0)).all()) {
      pi = box_newton(model, k, pi, gamma);
      y = sig_t * pi;
    }

    const Eigen::VectorXd grad = c.sigma[k] * (model.theta(k) + (gamma - 1.0) * y) + Qvec(pi);
    double res = 0.0;
    for (int j = 0; j < d; ++j) {
      if (pi[j] <= 0.0) res = std::max(res, std::max(grad[j], 0.0));
      else if (pi[j] >= 1.0) res = std::max(res, std::max(-grad[j], 0.0));
      else res = std::max(res, std::abs(grad[j]));
    }
    rep.foc_residual = std::max(rep.foc_residual, res);
    rep.h_star[k] = power_objective(model, k, pi, gamma);
    ys[k] = y;
  }
  rep.strategy = Strategy::from_y(model, std::move(ys), std::vector<double>(n, 0.0));
  for (auto& p : rep.strategy.pi) p = p.cwiseMax(0.0).cwiseMin(1.0);
  fill_bernoulli(rep, model, gamma, x);
  return rep;
}

std::vector<double> g_path(const TimeGrid& grid, const std::vector<double>& h_star) {
  auto H = cumulative_trapezoid(grid.nodes(), h_star);
  for (double& h : H) h = std::exp(h);
  return H;
}

std::vector<double> rho_path(const TimeGrid& grid, const std::vector<double>& h_star, double gamma) {
  const auto p = bernoulli_parts(grid, h_star, gamma);
  std::vector<double> rho(p.w.size());
  for (std::size_t k = 0; k < rho.size(); ++k) rho[k] = std::pow(p.S[k] / p.w[k], 1.0 - gamma);
  return rho;
}

std::vector<double> v_star_path(const TimeGrid& grid, const std::vector<double>& h_star, double gamma) {
  const auto p = bernoulli_parts(grid, h_star, gamma);
  std::vector<double> v(p.w.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = p.w[k] / p.S[k];
  return v;
}

std::vector<double> V_star_path(const TimeGrid& grid, const std::vector<double>& h_star, double gamma) {
  const auto p = bernoulli_parts(grid, h_star, gamma);
  std::vector<double> V(p.w.size());
  for (std::size_t k = 0; k < V.size(); ++k) V[k] = std::log(p.S[0] / p.S[k]);
  return V;
}

double chi_value(const TimeGrid& grid, const std::vector<double>& g, double gamma) {
  if (g.size() != grid.size()) throw Error(ErrorCode::InvalidInput, "g length differs from grid");
  const double q = 1.0 / (1.0 - gamma);
  std::vector<double> gq(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) gq[k] = std::pow(g[k], q);
  return gq.back() / (trapezoid(grid.nodes(), gq) + gq.back());
}

double cost_function(const MarketModel& model, const UtilitySpec& utility, const Strategy& s, double x) {
  const auto& grid = model.grid();
  const auto yy = y_norm_squared_path(model, s);
  const auto yth = y_theta_path(model, s);
  const auto& R = model.R();
  auto exponent = [&](double gamma, const std::vector<double>& K, std::size_t k) {
    return gamma * (R[k] - s.V[k] + yth[k]) - 0.5 * gamma * (1.0 - gamma) * yy[k] + K[k];
  };
  const auto K1 = jump_K_path(model, s, utility.gamma1);
  const auto K2 = utility.is_equal() ? K1 : jump_K_path(model, s, utility.gamma2);
  std::vector<double> f(grid.size());
  for (std::size_t k = 0; k < f.size(); ++k)
    f[k] = s.v[k] > 0.0 ? std::pow(s.v[k], utility.gamma1) * std::exp(exponent(utility.gamma1, K1, k)) : 0.0;
  const std::size_t last = grid.size() - 1;
  return std::pow(x, utility.gamma1) * trapezoid(grid.nodes(), f) +
         std::pow(x, utility.gamma2) * std::exp(exponent(utility.gamma2, K2, last));
}

MertonComparison compare_merton(const MarketModel& model, const UtilitySpec& utility, double x) {
  const auto jump = solve_power_1d(model, utility, x);
  const auto bare = solve_power_1d(model.without_jumps(), utility, x);
  MertonComparison cmp;
  cmp.t = model.grid().nodes();
  for (std::size_t k = 0; k < cmp.t.size(); ++k) {
    cmp.pi_star.push_back(jump.strategy.pi[k][0]);
    cmp.pi_bar.push_back(bare.strategy.pi[k][0]);
  }
  cmp.v_star = jump.strategy.v;
  cmp.v_bar = bare.strategy.v;
  cmp.rho_star = jump.rho;
  cmp.rho_bar = bare.rho;
  return cmp;
}

void write_comparison_csv(std::ostream& os, const MertonComparison& cmp) {
  os << "t,pi_jump,pi_diffusion,v_jump,v_diffusion\n" << std::setprecision(17);
  for (std::size_t k = 0; k < cmp.t.size(); ++k)
    os << cmp.t[k] << ',' << cmp.pi_star[k] << ',' << cmp.pi_bar[k] << ',' << cmp.v_star[k] << ','
       << cmp.v_bar[k] << '\n';
}

}  // namespace jdrisk
