#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace jdrisk {

class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> nodes);
  static TimeGrid uniform(double horizon, std::size_t count);

  const std::vector<double>& nodes() const { return nodes_; }
  double operator[](std::size_t k) const { return nodes_[k]; }
  std::size_t size() const { return nodes_.size(); }
  double horizon() const { return nodes_.back(); }

  // Index of the node equal to t (relative tolerance 1e-12); throws OffGrid.
  std::size_t index_of(double t) const;

 private:
  std::vector<double> nodes_;
};

//! Deterministic coefficients sampled on the grid nodes.
struct CoefficientPath {
  std::vector<double> r;
  std::vector<Eigen::VectorXd> mu;
  std::vector<Eigen::MatrixXd> sigma;

  static CoefficientPath constant(std::size_t count, double r, const Eigen::VectorXd& mu,
                                  const Eigen::MatrixXd& sigma);
  int dimension() const { return mu.empty() ? 0 : static_cast<int>(mu.front().size()); }
};

//! Jump-size law F on (-1, inf): finite point masses or a piecewise-linear
//! density tabulated at equally spaced abscissae.
class JumpLaw {
 public:
  static JumpLaw point_masses(std::vector<std::pair<double, double>> masses);
  static JumpLaw tabulated_density(double lower, double upper, std::vector<double> values,
                                   int quadrature_nodes = 129);

  bool is_point_mass() const { return density_.empty(); }

  // Discrete measure used for every integral against F: exact for point
  // masses, Gauss-Legendre nodes times density values otherwise.
  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }

  template <class F>
  double expect(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) s += weights_[i] * f(atoms_[i]);
    return s;
  }

  double mean() const { return expect([](double z) { return z; }); }
  double support_min() const { return lower_; }
  double support_max() const { return upper_; }

  // P(xi < z0), exact for both representations.
  double mass_below(double z0) const;

  // Inverse-CDF draw from u in (0,1).
  double sample(double u) const;

  const std::vector<double>& density_values() const { return density_; }

 private:
  double density_cdf(double z) const;

  std::vector<double> atoms_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;  // point-mass CDF or density CDF at table abscissae
  std::vector<double> density_;
  double lower_ = 0.0;
  double upper_ = 0.0;
};

struct AssetJumps {
  double lambda = 0.0;
  JumpLaw law = JumpLaw::point_masses({{0.0, 1.0}});
};

struct JumpSpec {
  std::vector<AssetJumps> assets;

  static JumpSpec none(int dimension);
  int dimension() const { return static_cast<int>(assets.size()); }
  bool nonnegative() const;
};

struct UtilitySpec {
  double gamma1 = 1.0;
  double gamma2 = 1.0;

  UtilitySpec() = default;
  UtilitySpec(double g1, double g2);
  static UtilitySpec equal(double gamma) { return {gamma, gamma}; }

  bool is_equal() const { return gamma1 == gamma2; }
  double q1() const { return 1.0 / (1.0 - gamma1); }
  double q2() const { return 1.0 / (1.0 - gamma2); }
};

//! Immutable market on a time grid with per-node market prices of risk.
class MarketModel {
 public:
  MarketModel(TimeGrid grid, CoefficientPath coeffs, JumpSpec jumps);

  const TimeGrid& grid() const { return grid_; }
  const CoefficientPath& coeffs() const { return coeffs_; }
  const JumpSpec& jumps() const { return jumps_; }
  int dimension() const { return coeffs_.dimension(); }
  std::size_t nodes() const { return grid_.size(); }

  const Eigen::VectorXd& theta(std::size_t k) const { return theta_[k]; }
  const Eigen::VectorXd& theta_hat(std::size_t k) const { return theta_hat_[k]; }
  const Eigen::MatrixXd& sigma_inverse(std::size_t k) const { return sigma_inv_[k]; }
  const Eigen::VectorXd& xi_lambda() const { return xi_lambda_; }

  // Cumulative R_t at every node.
  const std::vector<double>& R() const { return R_; }

  MarketModel without_jumps() const;
  MarketModel with_jumps(JumpSpec jumps) const;

 private:
  TimeGrid grid_;
  CoefficientPath coeffs_;
  JumpSpec jumps_;
  std::vector<Eigen::VectorXd> theta_;
  std::vector<Eigen::VectorXd> theta_hat_;
  std::vector<Eigen::MatrixXd> sigma_inv_;
  Eigen::VectorXd xi_lambda_;
  std::vector<double> R_;
};

constexpr double kSingularDeterminant = 1e-12;

Eigen::VectorXd theta(const MarketModel& model, std::size_t node);
Eigen::VectorXd theta_hat(const MarketModel& model, std::size_t node);
Eigen::VectorXd xi_lambda(const JumpSpec& jumps);

// Solves sigma x = b with full pivoting; throws SingularSigma.
Eigen::VectorXd solve_sigma(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& b);

// K^j(pi) = int [(1+pi z)^gamma - 1 - gamma pi z] nu^j(dz)
double K_transform(const JumpSpec& jumps, int asset, double pi, double gamma);
// Q^j(pi) = int [(1+pi z)^(gamma-1) - 1] z nu^j(dz)
double Q_transform(const JumpSpec& jumps, int asset, double pi, double gamma);

double R_integral(const MarketModel& model, double t);

// exp{ int_0^T sum_j int (e^{a(t,j,z)} - 1) nu^j(dz) dt } with trapezoid in t.
double expected_jump_exponential(const MarketModel& model,
                                 const std::function<double(double t, int asset, double z)>& a);

}  // namespace jdrisk
