#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "jdrisk/market.hpp"
#include "jdrisk/strategy.hpp"

namespace jdrisk {

struct SolveReport {
  Strategy strategy;
  double J_star = 0.0;
  std::vector<double> h_star;  // per-node supremum of the HJB objective
  std::vector<double> g;       // exp(int_0^t h*)
  std::vector<double> rho;     // u(t,x) = rho(t) x^gamma
  double chi = 1.0;
  double rho_star = std::numeric_limits<double>::quiet_NaN();
  double foc_residual = 0.0;
  double root_residual = 0.0;
  std::vector<std::string> flags;

  bool has_flag(const std::string& f) const;
};

struct FixedPointOptions {
  int max_iterations = 500;
  double damping = 0.5;
  double tolerance = 1e-13;
};

SolveReport solve_linear(const MarketModel& model, double x);

// First-order function of the one-asset power problem; strictly decreasing.
double eta_1d(const MarketModel& model, std::size_t node, double pi, double gamma);

// Per-node HJB objective G(t, pi) for the equal-gamma problem.
double power_objective(const MarketModel& model, std::size_t node, const Eigen::VectorXd& pi, double gamma);

SolveReport solve_power_1d(const MarketModel& model, const UtilitySpec& utility, double x);
SolveReport solve_power_equal(const MarketModel& model, const UtilitySpec& utility, double x,
                              const FixedPointOptions& options = {});

std::vector<double> g_path(const TimeGrid& grid, const std::vector<double>& h_star);
std::vector<double> rho_path(const TimeGrid& grid, const std::vector<double>& h_star, double gamma);
std::vector<double> v_star_path(const TimeGrid& grid, const std::vector<double>& h_star, double gamma);
// V*_t = ln(S(0)/S(t)) with S(t) = g^q(T) + int_t^T g^q; consistent with v_star_path.
std::vector<double> V_star_path(const TimeGrid& grid, const std::vector<double>& h_star, double gamma);
double chi_value(const TimeGrid& grid, const std::vector<double>& g, double gamma);

// E[ int_0^T c^gamma1 dt + X_T^gamma2 ] in closed form on the grid.
double cost_function(const MarketModel& model, const UtilitySpec& utility, const Strategy& strategy, double x);

struct MertonComparison {
  std::vector<double> t;
  std::vector<double> pi_star, pi_bar;
  std::vector<double> v_star, v_bar;
  std::vector<double> rho_star, rho_bar;
};

MertonComparison compare_merton(const MarketModel& model, const UtilitySpec& utility, double x);
void write_comparison_csv(std::ostream& os, const MertonComparison& cmp);

}  // namespace jdrisk
