#include "jdrisk/constrained.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jdrisk/error.hpp"
#include "jdrisk/negjumps.hpp"
#include "jdrisk/quadrature.hpp"

namespace jdrisk {

namespace {

void require_assumption_j(const MarketModel& model) {
  if (!model.jumps().nonnegative())
    throw Error(ErrorCode::AssumptionJViolated, "jump sizes must be nonnegative");
}

RiskLevel plain_level(const MarketModel& model, const RiskSpec& risk) {
  risk.validate();
  require_assumption_j(model);
  return RiskLevel::plain(risk.beta);
}

std::vector<double> sqrt_path(std::vector<double> v) {
  for (double& x : v) x = std::sqrt(std::max(0.0, x));
  return v;
}

double theta_norm(const MarketModel& model) {
  std::vector<Eigen::VectorXd> th(model.nodes());
  for (std::size_t k = 0; k < th.size(); ++k) th[k] = model.theta(k);
  return l2_norm(model.grid(), th);
}

double theta_hat_norm(const MarketModel& model) {
  std::vector<Eigen::VectorXd> th(model.nodes());
  for (std::size_t k = 0; k < th.size(); ++k) th[k] = model.theta_hat(k);
  return l2_norm(model.grid(), th);
}

std::string fmt(double a) {
  std::ostringstream os;
  os.precision(10);
  os << a;
  return os.str();
}

}  // namespace

std::vector<double> var_constraint_slack(const Strategy& s, const MarketModel& model, const RiskLevel& level,
                                         double kappa) {
  const auto yy = y_norm_squared_path(model, s);
  const auto yn = sqrt_path(yy);
  const auto yth = y_theta_hat_path(model, s);
  const double q = level.q();
  const double lk = std::log1p(-kappa);
  std::vector<double> out(yy.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = -0.5 * yy[k] + q * yn[k] - s.V[k] + yth[k] - lk;
  return out;
}

std::vector<double> es_constraint_slack(const Strategy& s, const MarketModel& model, const RiskLevel& level,
                                        double kappa) {
  const auto yn = sqrt_path(y_norm_squared_path(model, s));
  const auto yth = y_theta_hat_path(model, s);
  const double aq = std::abs(level.q());
  const double lk = std::log1p(-kappa);
  std::vector<double> out(yn.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = -s.V[k] + yth[k] + level.F(yn[k] + aq) - lk;
  return out;
}

double transformed_var_constraint(const Strategy& s, const MarketModel& model, const RiskSpec& risk, double t) {
  return var_constraint_slack(s, model, risk_level(model, risk), risk.kappa).at(model.grid().index_of(t));
}

double transformed_es_constraint(const Strategy& s, const MarketModel& model, const RiskSpec& risk, double t) {
  return es_constraint_slack(s, model, risk_level(model, risk), risk.kappa).at(model.grid().index_of(t));
}

double jump_drift_K(const MarketModel& model) {
  const double thn = theta_norm(model);
  if (thn == 0.0) return 0.0;
  std::vector<double> f(model.nodes());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = model.theta(k).dot(model.theta(k) - model.theta_hat(k));
  return trapezoid(model.grid().nodes(), f) / thn;
}

std::pair<double, double> kappa_range_var_gamma1(const MarketModel& model, const RiskLevel& level) {
  const double q = level.q();
  return {std::max(0.0, -std::expm1(0.5 * q * q - std::abs(q) * theta_norm(model))), 1.0};
}

double rho_var_gamma1(const MarketModel& model, const RiskLevel& level, double kappa) {
  const double thn = theta_norm(model);
  const double aq = std::abs(level.q());
  const double K = jump_drift_K(model);
  const double b = thn - aq - K;
  return std::sqrt(b * b - 2.0 * std::log1p(-kappa)) + b;
}

double rho_var_gamma1(const MarketModel& model, const RiskSpec& risk) {
  const RiskLevel level = plain_level(model, risk);
  const auto range = kappa_range_var_gamma1(model, level);
  if (!(risk.kappa > range.first && risk.kappa < range.second))
    throw Error(ErrorCode::KappaOutOfRange, "kappa must exceed " + fmt(range.first));
  return rho_var_gamma1(model, level, risk.kappa);
}

double rho_es_gamma1(const MarketModel& model, const RiskLevel& level, double kappa, bool force) {
  const double thn = theta_norm(model);
  const double aq = std::abs(level.q());
  if (aq < 2.0 * thn && !force)
    throw Error(ErrorCode::ConditionViolated, "|q_beta| = " + fmt(aq) + " < 2||theta||_T = " + fmt(2.0 * thn));
  const double K = jump_drift_K(model);
  const double target = std::log1p(-kappa);
  auto psi = [&](double rho) { return thn * rho + level.F(rho + aq) - rho * K; };
  double lo = 0.0, hi = 1.0;
  int doublings = 0;
  while (psi(hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 60) throw Error(ErrorCode::NoConvergence, "ES radius bracket did not close");
  }
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (psi(mid) > target ? lo : hi) = mid;
  }
  return std::abs(psi(lo) - target) <= std::abs(psi(hi) - target) ? lo : hi;
}

double rho_es_gamma1(const MarketModel& model, const RiskSpec& risk) {
  return rho_es_gamma1(model, plain_level(model, risk), risk.kappa);
}

double rho_cap_gamma1(const MarketModel& model) {
  const double thn = theta_norm(model);
  const auto& grid = model.grid();
  std::vector<double> s2(grid.size());
  for (std::size_t k = 0; k < s2.size(); ++k) s2[k] = model.coeffs().sigma[k].squaredNorm();
  double cap = std::sqrt(grid.horizon()) * std::sqrt(trapezoid(grid.nodes(), s2));
  if (thn == 0.0) return cap;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Eigen::VectorXd dir = model.sigma_inverse(k).transpose() * model.theta(k) / thn;
    for (int j = 0; j < dir.size(); ++j) {
      if (dir[j] < -1e-14)
        throw Error(ErrorCode::InvalidStrategy, "direction theta implies short selling at node " + std::to_string(k));
      if (dir[j] > 0.0) cap = std::min(cap, 1.0 / dir[j]);
    }
  }
  return cap;
}

namespace {

SolveReport gamma1_report(const MarketModel& model, double rho_star, double x) {
  const double thn = theta_norm(model);
  const std::size_t n = model.nodes();
  SolveReport rep;
  rep.h_star.assign(n, 0.0);
  rep.g.assign(n, 1.0);
  rep.rho.assign(n, 1.0);
  rep.chi = 1.0;
  if (thn == 0.0) {
    rep.strategy = Strategy::zero(model);
    rep.rho_star = 0.0;
    rep.J_star = x * std::exp(model.R().back());
    return rep;
  }
  const double cap = rho_cap_gamma1(model);
  const double rho_bar = std::min(rho_star, cap);
  if (rho_bar < rho_star) rep.flags.push_back("RhoCapped");
  std::vector<Eigen::VectorXd> y(n);
  for (std::size_t k = 0; k < n; ++k) y[k] = model.theta(k) * (rho_bar / thn);
  rep.strategy = Strategy::from_y(model, std::move(y), std::vector<double>(n, 0.0));
  for (auto& p : rep.strategy.pi) p = p.cwiseMax(0.0).cwiseMin(1.0);
  rep.rho_star = rho_bar;
  rep.J_star = x * std::exp(model.R().back() + thn * rho_bar);
  return rep;
}

void check_theta_hat(const MarketModel& model) {
  for (std::size_t k = 0; k < model.nodes(); ++k)
    if ((model.theta_hat(k).array() < 0.0).any())
      throw Error(ErrorCode::ThetaHatNegative, "theta_hat has a negative component at node " + std::to_string(k));
}

}  // namespace

SolveReport solve_var_gamma1(const MarketModel& model, const RiskLevel& level, double kappa, double x, bool force) {
  if (theta_norm(model) == 0.0) return gamma1_report(model, 0.0, x);
  check_theta_hat(model);
  const auto range = kappa_range_var_gamma1(model, level);
  const bool in_range = kappa > range.first && kappa < range.second;
  if (!in_range && !force) throw Error(ErrorCode::KappaOutOfRange, "kappa must exceed " + fmt(range.first));
  const double rho = rho_var_gamma1(model, level, kappa);
  auto rep = gamma1_report(model, rho, x);
  const double thn = theta_norm(model);
  const double K = jump_drift_K(model);
  rep.root_residual = std::abs(-0.5 * rho * rho + level.q() * rho + thn * rho - rho * K - std::log1p(-kappa));
  if (!in_range) rep.flags.push_back("KappaOutOfRange");
  return rep;
}

SolveReport solve_var_gamma1(const MarketModel& model, const RiskSpec& risk, double x, bool force) {
  return solve_var_gamma1(model, plain_level(model, risk), risk.kappa, x, force);
}

SolveReport solve_es_gamma1(const MarketModel& model, const RiskLevel& level, double kappa, double x, bool force) {
  if (theta_norm(model) == 0.0) return gamma1_report(model, 0.0, x);
  check_theta_hat(model);
  const double thn = theta_norm(model);
  const bool cond = std::abs(level.q()) >= 2.0 * thn;
  const double rho = rho_es_gamma1(model, level, kappa, force);
  auto rep = gamma1_report(model, rho, x);
  const double K = jump_drift_K(model);
  rep.root_residual = std::abs(thn * rho + level.F(rho + std::abs(level.q())) - rho * K - std::log1p(-kappa));
  if (!cond) rep.flags.push_back("ConditionViolated");
  return rep;
}

SolveReport solve_es_gamma1(const MarketModel& model, const RiskSpec& risk, double x, bool force) {
  return solve_es_gamma1(model, plain_level(model, risk), risk.kappa, x, force);
}

namespace {

struct CertificateBounds {
  double b = 0.0;        // ||y*||_T <= q b
  double c_neg = 0.0;    // (y*, theta_hat)_t >= -q b c_neg
  double y_theta_hat_T = 0.0;
  double m_hat_theta = 0.0;
};

CertificateBounds certificate_bounds(const MarketModel& model, const UtilitySpec& utility, const SolveReport& rep) {
  const double gamma = utility.gamma1;
  const double q = 1.0 / (1.0 - gamma);
  const auto& s = rep.strategy;
  const std::size_t n = model.nodes();
  CertificateBounds cb;
  const double yT = std::sqrt(std::max(0.0, y_norm_squared_path(model, s).back()));
  cb.b = std::max(theta_norm(model), yT / q);
  bool y_nonneg = true;
  std::vector<Eigen::VectorXd> neg(n);
  std::vector<double> mth(n);
  for (std::size_t k = 0; k < n; ++k) {
    if ((s.y[k].array() < 0.0).any()) y_nonneg = false;
    neg[k] = model.theta_hat(k).cwiseMin(0.0);
    Eigen::VectorXd Q(model.dimension());
    for (int j = 0; j < model.dimension(); ++j) Q[j] = Q_transform(model.jumps(), j, s.pi[k][j], gamma);
    mth[k] = model.theta_hat(k).dot(model.sigma_inverse(k) * Q);
  }
  cb.c_neg = y_nonneg ? l2_norm(model.grid(), neg) : theta_hat_norm(model);
  cb.y_theta_hat_T = y_theta_hat_path(model, s).back();
  cb.m_hat_theta = trapezoid(model.grid().nodes(), mth);
  return cb;
}

void require_equal_fraction(const UtilitySpec& utility) {
  if (!utility.is_equal() || !(utility.gamma1 > 0.0 && utility.gamma1 < 1.0))
    throw Error(ErrorCode::InvalidInput, "certificates need gamma1 = gamma2 in (0, 1)");
}

}  // namespace

ConstraintCertificate certify_var(const MarketModel& model, const UtilitySpec& utility, const RiskLevel& level,
                                  double kappa, SolveReport unconstrained) {
  require_equal_fraction(utility);
  const double q = 1.0 / (1.0 - utility.gamma1);
  const auto cb = certificate_bounds(model, utility, unconstrained);
  ConstraintCertificate c;
  c.kind = RiskKind::VaR;
  c.chi = unconstrained.chi;
  c.m_hat_theta = cb.m_hat_theta;
  c.l_star = -q * q * cb.b * cb.b + level.q() * q * cb.b - q * cb.b * cb.c_neg;
  c.condition_lhs = 1.0 - c.chi * std::exp(c.l_star);
  c.condition_rhs = kappa;
  c.kappa_range = {c.condition_lhs, 1.0};
  c.active = !(c.condition_lhs <= kappa && kappa < 1.0);
  if (c.active) c.reason = "1 - chi exp(l*) = " + fmt(c.condition_lhs) + " exceeds kappa = " + fmt(kappa);
  c.solution = std::move(unconstrained);
  return c;
}

ConstraintCertificate certify_es(const MarketModel& model, const UtilitySpec& utility, const RiskLevel& level,
                                 double kappa, SolveReport unconstrained) {
  require_equal_fraction(utility);
  const double q = 1.0 / (1.0 - utility.gamma1);
  const auto cb = certificate_bounds(model, utility, unconstrained);
  const double aq = std::abs(level.q());
  ConstraintCertificate c;
  c.kind = RiskKind::ES;
  c.chi = unconstrained.chi;
  c.m_hat_theta = cb.m_hat_theta;
  c.precondition_ok = aq >= 2.0 * cb.b;
  const double expo = cb.y_theta_hat_T + level.F(q * cb.b + aq);
  c.condition_lhs = 1.0 - c.chi * std::exp(expo);
  c.condition_rhs = kappa;
  c.kappa_range = {c.condition_lhs, 1.0};
  c.active = !(c.precondition_ok && c.condition_lhs <= kappa && kappa < 1.0);
  if (!c.precondition_ok)
    c.reason = "|q_beta| = " + fmt(aq) + " below 2 ||theta||_T = " + fmt(2.0 * cb.b);
  else if (c.active)
    c.reason = "1 - chi exp(...) = " + fmt(c.condition_lhs) + " exceeds kappa = " + fmt(kappa);
  c.solution = std::move(unconstrained);
  return c;
}

ConstraintCertificate certify_var_gamma(const MarketModel& model, const UtilitySpec& utility, const RiskSpec& risk,
                                        double x) {
  const RiskLevel level = plain_level(model, risk);
  return certify_var(model, utility, level, risk.kappa, solve_power_equal(model, utility, x));
}

ConstraintCertificate certify_es_gamma(const MarketModel& model, const UtilitySpec& utility, const RiskSpec& risk,
                                       double x) {
  const RiskLevel level = plain_level(model, risk);
  return certify_es(model, utility, level, risk.kappa, solve_power_equal(model, utility, x));
}

namespace {

// Trapezoid integral of g1_hat^q1 = exp(q1 gamma1 R_t) and its cumulative path.
std::vector<double> g1_power_cumulative(const MarketModel& model, const UtilitySpec& utility) {
  std::vector<double> f(model.nodes());
  const double e = utility.q1() * utility.gamma1;
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = std::exp(e * model.R()[k]);
  return cumulative_trapezoid(model.grid().nodes(), f);
}

void require_distinct(const UtilitySpec& utility) {
  if (utility.is_equal() || !(utility.gamma1 < 1.0 && utility.gamma2 < 1.0))
    throw Error(ErrorCode::InvalidInput, "consume-all solver needs distinct gamma1, gamma2 in (0, 1)");
}

}  // namespace

double M_hat(const MarketModel& model, const UtilitySpec& utility, double x, double eta) {
  const double A = g1_power_cumulative(model, utility).back();
  const double norm = std::pow(A, 1.0 - utility.gamma1);
  const double g2T = std::exp(utility.gamma2 * model.R().back());
  return std::pow(x, utility.gamma1) * std::pow(eta, utility.gamma1) * norm +
         std::pow(x, utility.gamma2) * std::pow(1.0 - eta, utility.gamma2) * g2T;
}

double M_hat_argmax(const MarketModel& model, const UtilitySpec& utility, double x) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 1.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = M_hat(model, utility, x, c), fd = M_hat(model, utility, x, d);
  while (b - a > 1e-10) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = M_hat(model, utility, x, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = M_hat(model, utility, x, d);
    }
  }
  return 0.5 * (a + b);
}

DiffGammaReport solve_diff_gamma(const MarketModel& model, const UtilitySpec& utility, RiskKind kind,
                                 const RiskLevel& level, double kappa, double x, bool force) {
  require_distinct(utility);
  DiffGammaReport rep;
  const auto G = g1_power_cumulative(model, utility);
  const double A = G.back();
  const double g1 = utility.gamma1, g2 = utility.gamma2;
  const double norm = std::pow(A, 1.0 - g1);
  const double g2T = std::exp(g2 * model.R().back());
  const double xg1 = std::pow(x, g1), xg2 = std::pow(x, g2);

  rep.M_hat_argmax = M_hat_argmax(model, utility, x);
  std::vector<std::string> violations;
  if (kappa > rep.M_hat_argmax) violations.push_back("kappa exceeds argmax of M_hat (" + fmt(rep.M_hat_argmax) + ")");

  // Infimum of d/deta ln M_hat over (0, kappa]; the derivative decreases in
  // eta on [0, argmax] so the scan ends at kappa.
  auto dlogM = [&](double eta) {
    const double m = xg1 * std::pow(eta, g1) * norm + xg2 * std::pow(1.0 - eta, g2) * g2T;
    const double dm = g1 * xg1 * std::pow(eta, g1 - 1.0) * norm - g2 * xg2 * std::pow(1.0 - eta, g2 - 1.0) * g2T;
    return dm / m;
  };
  constexpr int scan = 2000;
  double inf = dlogM(kappa);
  for (int i = 1; i < scan; ++i) inf = std::min(inf, dlogM(kappa * i / scan));
  rep.dlogM_inf = inf;

  const double a = theta_hat_norm(model);
  const double bf = std::max(theta_norm(model), a);
  const double aq = std::abs(level.q());
  rep.condition_lhs = aq;
  if (kind == RiskKind::VaR)
    rep.condition_rhs = a + bf * std::max(g1, g2) / ((1.0 - kappa) * inf);
  else
    rep.condition_rhs = 2.0 * a + bf * std::min(g1, g2) / ((1.0 - kappa) * inf);
  if (!(inf > 0.0)) rep.condition_rhs = std::numeric_limits<double>::infinity();
  if (!(rep.condition_lhs >= rep.condition_rhs))
    violations.push_back("|q_beta| = " + fmt(rep.condition_lhs) + " below " + fmt(rep.condition_rhs));
  rep.condition_ok = violations.empty();
  if (!rep.condition_ok) {
    std::string msg;
    for (const auto& v : violations) msg += (msg.empty() ? "" : "; ") + v;
    if (!force) throw Error(ErrorCode::ConditionViolated, msg);
    rep.flags.push_back("ConditionViolated");
  }

  constexpr int curve = 101;
  for (int i = 0; i < curve; ++i) {
    const double eta = kappa * i / (curve - 1);
    rep.eta_grid.push_back(eta);
    rep.M_hat_curve.push_back(xg1 * std::pow(eta, g1) * norm + xg2 * std::pow(1.0 - eta, g2) * g2T);
    const double base = (aq - a) * (aq - a) - 2.0 * std::log1p(-kappa) + 2.0 * std::log1p(-eta);
    rep.rho_eta.push_back(std::sqrt(std::max(0.0, base)) - aq + a);
  }

  const std::size_t n = model.nodes();
  std::vector<double> v(n), V(n);
  const double e = utility.q1() * g1;
  for (std::size_t k = 0; k < n; ++k) {
    v[k] = kappa * std::exp(e * model.R()[k]) / (A - kappa * G[k]);
    V[k] = -std::log1p(-kappa * G[k] / A);
  }
  rep.strategy = Strategy::zero(model);
  rep.strategy.v = std::move(v);
  rep.strategy.V = std::move(V);
  rep.consumed_fraction = -std::expm1(-rep.strategy.V.back());
  rep.J_upper = xg1 * std::pow(kappa, g1) * norm + xg2 * std::pow(1.0 - kappa, g2) * g2T;
  rep.J_attained = cost_function(model, utility, rep.strategy, x);
  return rep;
}

DiffGammaReport solve_diff_gamma(const MarketModel& model, const UtilitySpec& utility, const RiskSpec& risk, double x,
                                 bool force) {
  return solve_diff_gamma(model, utility, risk.kind, plain_level(model, risk), risk.kappa, x, force);
}

SolveReport solve_no_consumption(const MarketModel& model, const UtilitySpec& utility, double x) {
  auto rep = solve_power_equal(model, utility, x);
  const std::size_t n = model.nodes();
  const auto H = cumulative_trapezoid(model.grid().nodes(), rep.h_star);
  rep.strategy.v.assign(n, 0.0);
  rep.strategy.V.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) rep.rho[k] = std::exp(H.back() - H[k]);
  rep.g = g_path(model.grid(), rep.h_star);
  rep.chi = 1.0;
  rep.J_star = std::pow(x, utility.gamma1) * rep.rho[0];
  return rep;
}

ConstraintCertificate certify_no_consumption(const MarketModel& model, const UtilitySpec& utility,
                                             const RiskSpec& risk, double x) {
  const RiskLevel level = plain_level(model, risk);
  auto rep = solve_no_consumption(model, utility, x);
  return risk.kind == RiskKind::VaR ? certify_var(model, utility, level, risk.kappa, std::move(rep))
                                    : certify_es(model, utility, level, risk.kappa, std::move(rep));
}

}  // namespace jdrisk
