#include "jdrisk/market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "jdrisk/error.hpp"
#include "jdrisk/quadrature.hpp"

namespace jdrisk {

namespace {

bool finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) throw Error(ErrorCode::InvalidInput, "time grid needs at least two nodes");
  if (nodes_.front() != 0.0) throw Error(ErrorCode::InvalidInput, "time grid must start at 0");
  for (std::size_t k = 1; k < nodes_.size(); ++k)
    if (!(nodes_[k] > nodes_[k - 1]) || !std::isfinite(nodes_[k]))
      throw Error(ErrorCode::InvalidInput, "time grid must be strictly increasing");
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t count) {
  if (!(horizon > 0.0) || count < 2) throw Error(ErrorCode::InvalidInput, "bad uniform grid");
  std::vector<double> t(count);
  for (std::size_t k = 0; k < count; ++k)
    t[k] = horizon * static_cast<double>(k) / static_cast<double>(count - 1);
  t.back() = horizon;
  return TimeGrid(std::move(t));
}

std::size_t TimeGrid::index_of(double t) const {
  const double tol = 1e-12 * std::max(1.0, horizon());
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t - tol);
  if (it == nodes_.end() || std::abs(*it - t) > tol)
    throw Error(ErrorCode::OffGrid, "t = " + std::to_string(t) + " is not a grid node");
  return static_cast<std::size_t>(it - nodes_.begin());
}

CoefficientPath CoefficientPath::constant(std::size_t count, double r, const Eigen::VectorXd& mu,
                                          const Eigen::MatrixXd& sigma) {
  CoefficientPath c;
  c.r.assign(count, r);
  c.mu.assign(count, mu);
  c.sigma.assign(count, sigma);
  return c;
}

JumpLaw JumpLaw::point_masses(std::vector<std::pair<double, double>> masses) {
  if (masses.empty()) throw Error(ErrorCode::InvalidInput, "empty point-mass list");
  std::sort(masses.begin(), masses.end());
  JumpLaw law;
  double total = 0.0;
  for (const auto& [z, p] : masses) {
    if (!(z > -1.0) || !std::isfinite(z))
      throw Error(ErrorCode::UnsupportedSupport, "jump sizes must exceed -1");
    if (!(p > 0.0)) throw Error(ErrorCode::InvalidInput, "point-mass probabilities must be positive");
    total += p;
    law.atoms_.push_back(z);
    law.weights_.push_back(p);
    law.cumulative_.push_back(total);
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw Error(ErrorCode::InvalidInput, "point-mass probabilities must sum to 1");
  law.lower_ = law.atoms_.front();
  law.upper_ = law.atoms_.back();
  return law;
}

JumpLaw JumpLaw::tabulated_density(double lower, double upper, std::vector<double> values,
                                   int quadrature_nodes) {
  if (!(lower > -1.0) || !(upper > lower))
    throw Error(ErrorCode::UnsupportedSupport, "density support must lie in (-1, inf)");
  if (values.size() < 2) throw Error(ErrorCode::InvalidInput, "density table needs two values");
  for (double f : values)
    if (!(f >= 0.0) || !std::isfinite(f))
      throw Error(ErrorCode::InvalidInput, "density values must be nonnegative");
  JumpLaw law;
  law.lower_ = lower;
  law.upper_ = upper;
  law.density_ = std::move(values);
  const std::size_t m = law.density_.size() - 1;
  const double h = (upper - lower) / static_cast<double>(m);
  law.cumulative_.assign(m + 1, 0.0);
  for (std::size_t i = 1; i <= m; ++i)
    law.cumulative_[i] = law.cumulative_[i - 1] + 0.5 * h * (law.density_[i - 1] + law.density_[i]);
  if (std::abs(law.cumulative_.back() - 1.0) > 1e-8)
    throw Error(ErrorCode::InvalidInput, "density must integrate to 1");

  const GaussLegendre rule(quadrature_nodes);
  const double half = 0.5 * (upper - lower), mid = 0.5 * (upper + lower);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double z = mid + half * rule.nodes[i];
    const double s = (z - lower) / h;
    const std::size_t c = std::min<std::size_t>(static_cast<std::size_t>(s), m - 1);
    const double w = s - static_cast<double>(c);
    const double f = (1.0 - w) * law.density_[c] + w * law.density_[c + 1];
    law.atoms_.push_back(z);
    law.weights_.push_back(half * rule.weights[i] * f);
  }
  return law;
}

double JumpLaw::density_cdf(double z) const {
  if (z <= lower_) return 0.0;
  if (z >= upper_) return 1.0;
  const std::size_t m = density_.size() - 1;
  const double h = (upper_ - lower_) / static_cast<double>(m);
  const double s = (z - lower_) / h;
  const std::size_t c = std::min<std::size_t>(static_cast<std::size_t>(s), m - 1);
  const double dz = z - (lower_ + h * static_cast<double>(c));
  const double slope = (density_[c + 1] - density_[c]) / h;
  return cumulative_[c] + density_[c] * dz + 0.5 * slope * dz * dz;
}

double JumpLaw::mass_below(double z0) const {
  if (!is_point_mass()) return density_cdf(z0);
  double p = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    if (atoms_[i] < z0) p += weights_[i];
  return p;
}

double JumpLaw::sample(double u) const {
  if (is_point_mass()) {
    const double target = u * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    if (it == cumulative_.end()) --it;
    return atoms_[static_cast<std::size_t>(it - cumulative_.begin())];
  }
  const double target = u * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  std::size_t c = it == cumulative_.begin() ? 0 : static_cast<std::size_t>(it - cumulative_.begin()) - 1;
  const std::size_t m = density_.size() - 1;
  c = std::min(c, m - 1);
  const double h = (upper_ - lower_) / static_cast<double>(m);
  const double f0 = density_[c];
  const double slope = (density_[c + 1] - f0) / h;
  const double rem = target - cumulative_[c];
  // Solve f0 dz + slope dz^2 / 2 = rem in the stable root form.
  double dz;
  if (std::abs(slope) < 1e-14 * std::max(1.0, f0)) {
    dz = f0 > 0.0 ? rem / f0 : 0.0;
  } else {
    const double disc = std::max(0.0, f0 * f0 + 2.0 * slope * rem);
    dz = 2.0 * rem / (f0 + std::sqrt(disc));
  }
  return std::clamp(lower_ + h * static_cast<double>(c) + dz, lower_, upper_);
}

JumpSpec JumpSpec::none(int dimension) {
  JumpSpec s;
  s.assets.resize(static_cast<std::size_t>(dimension));
  return s;
}

bool JumpSpec::nonnegative() const {
  for (const auto& a : assets)
    if (a.lambda > 0.0 && a.law.support_min() < 0.0) return false;
  return true;
}

UtilitySpec::UtilitySpec(double g1, double g2) : gamma1(g1), gamma2(g2) {
  if (!(g1 > 0.0 && g1 <= 1.0) || !(g2 > 0.0 && g2 <= 1.0))
    throw Error(ErrorCode::InvalidInput, "utility exponents must lie in (0, 1]");
}

Eigen::VectorXd solve_sigma(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& b) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sigma);
  if (std::abs(lu.determinant()) < kSingularDeterminant || !lu.isInvertible())
    throw Error(ErrorCode::SingularSigma, "sigma determinant below 1e-12");
  return lu.solve(b);
}

Eigen::VectorXd xi_lambda(const JumpSpec& jumps) {
  Eigen::VectorXd xi(jumps.dimension());
  for (int j = 0; j < jumps.dimension(); ++j) {
    const auto& a = jumps.assets[static_cast<std::size_t>(j)];
    xi[j] = a.lambda * a.law.mean();
  }
  return xi;
}

MarketModel::MarketModel(TimeGrid grid, CoefficientPath coeffs, JumpSpec jumps)
    : grid_(std::move(grid)), coeffs_(std::move(coeffs)), jumps_(std::move(jumps)) {
  const std::size_t n = grid_.size();
  const int d = coeffs_.dimension();
  if (d < 1) throw Error(ErrorCode::InvalidInput, "market dimension must be positive");
  if (coeffs_.r.size() != n || coeffs_.mu.size() != n || coeffs_.sigma.size() != n)
    throw Error(ErrorCode::InvalidInput, "coefficient paths must have one sample per node");
  if (jumps_.dimension() != d)
    throw Error(ErrorCode::InvalidInput, "jump specification dimension differs from market");
  for (const auto& a : jumps_.assets)
    if (!(a.lambda >= 0.0) || !std::isfinite(a.lambda))
      throw Error(ErrorCode::InvalidInput, "jump intensities must be nonnegative");

  xi_lambda_ = jdrisk::xi_lambda(jumps_);
  theta_.resize(n);
  theta_hat_.resize(n);
  sigma_inv_.resize(n);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(d);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& s = coeffs_.sigma[k];
    if (s.rows() != d || s.cols() != d || coeffs_.mu[k].size() != d)
      throw Error(ErrorCode::InvalidInput, "inconsistent coefficient dimensions");
    if (!std::isfinite(coeffs_.r[k]) || !coeffs_.mu[k].allFinite() || !finite(s))
      throw Error(ErrorCode::InvalidInput, "coefficient samples must be finite");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(s);
    if (std::abs(lu.determinant()) < kSingularDeterminant || !lu.isInvertible())
      throw Error(ErrorCode::SingularSigma, "sigma singular at node " + std::to_string(k));
    const Eigen::VectorXd excess = coeffs_.mu[k] - coeffs_.r[k] * ones;
    theta_[k] = lu.solve(excess);
    theta_hat_[k] = lu.solve(excess - xi_lambda_);
    sigma_inv_[k] = lu.inverse();
  }
  R_ = cumulative_trapezoid(grid_.nodes(), coeffs_.r);
}

MarketModel MarketModel::without_jumps() const { return with_jumps(JumpSpec::none(dimension())); }

MarketModel MarketModel::with_jumps(JumpSpec jumps) const { return MarketModel(grid_, coeffs_, std::move(jumps)); }

Eigen::VectorXd theta(const MarketModel& model, std::size_t node) {
  const auto& c = model.coeffs();
  return solve_sigma(c.sigma.at(node), c.mu.at(node) - c.r.at(node) * Eigen::VectorXd::Ones(model.dimension()));
}

Eigen::VectorXd theta_hat(const MarketModel& model, std::size_t node) {
  const auto& c = model.coeffs();
  return solve_sigma(c.sigma.at(node), c.mu.at(node) - c.r.at(node) * Eigen::VectorXd::Ones(model.dimension()) -
                                           model.xi_lambda());
}

namespace {

void check_support(const JumpLaw& law, double pi) {
  if (1.0 + pi * law.support_min() <= 0.0 || 1.0 + pi * law.support_max() <= 0.0)
    throw Error(ErrorCode::UnsupportedSupport, "1 + pi z must stay positive on the jump support");
}

}  // namespace

double K_transform(const JumpSpec& jumps, int asset, double pi, double gamma) {
  const auto& a = jumps.assets.at(static_cast<std::size_t>(asset));
  if (a.lambda == 0.0 || pi == 0.0 || gamma == 1.0) return 0.0;
  check_support(a.law, pi);
  return a.lambda * a.law.expect([&](double z) {
    const double pz = pi * z;
    // pow(1+x, g) - 1 evaluated without cancellation.
    return std::expm1(gamma * std::log1p(pz)) - gamma * pz;
  });
}

double Q_transform(const JumpSpec& jumps, int asset, double pi, double gamma) {
  const auto& a = jumps.assets.at(static_cast<std::size_t>(asset));
  if (a.lambda == 0.0 || pi == 0.0 || gamma == 1.0) return 0.0;
  check_support(a.law, pi);
  return a.lambda * a.law.expect([&](double z) { return std::expm1((gamma - 1.0) * std::log1p(pi * z)) * z; });
}

double R_integral(const MarketModel& model, double t) { return model.R()[model.grid().index_of(t)]; }

double expected_jump_exponential(const MarketModel& model,
                                 const std::function<double(double, int, double)>& a) {
  const auto& t = model.grid().nodes();
  std::vector<double> inner(t.size(), 0.0);
  for (std::size_t k = 0; k < t.size(); ++k) {
    for (int j = 0; j < model.dimension(); ++j) {
      const auto& aj = model.jumps().assets[static_cast<std::size_t>(j)];
      if (aj.lambda == 0.0) continue;
      inner[k] += aj.lambda * aj.law.expect([&](double z) { return std::expm1(a(t[k], j, z)); });
    }
    if (!std::isfinite(inner[k]))
      throw Error(ErrorCode::MomentDiverges, "jump exponential moment is not finite");
  }
  return std::exp(trapezoid(t, inner));
}

}  // namespace jdrisk
