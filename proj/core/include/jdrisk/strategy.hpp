#pragma once

#include <Eigen/Dense>
#include <vector>

#include "jdrisk/market.hpp"

namespace jdrisk {

//! Deterministic strategy sampled on the model grid: y = sigma' pi, consumption
//! rate v and its cumulative integral V.
struct Strategy {
  std::vector<Eigen::VectorXd> y;
  std::vector<Eigen::VectorXd> pi;
  std::vector<double> v;
  std::vector<double> V;

  // V is integrated from v by the trapezoid rule.
  static Strategy from_pi(const MarketModel& model, std::vector<Eigen::VectorXd> pi, std::vector<double> v);
  static Strategy from_y(const MarketModel& model, std::vector<Eigen::VectorXd> y, std::vector<double> v);
  static Strategy zero(const MarketModel& model);

  std::size_t size() const { return v.size(); }

  // Throws InvalidStrategy if pi leaves [0,1]^d, v < 0, or y != sigma' pi.
  void validate(const MarketModel& model, double tol = 1e-10) const;
};

double V_integral(const MarketModel& model, const Strategy& s, double t);
double inner_product_path(const MarketModel& model, const Strategy& s, double t);

// Cumulative paths on every node.
std::vector<double> y_norm_squared_path(const MarketModel& model, const Strategy& s);
std::vector<double> y_theta_hat_path(const MarketModel& model, const Strategy& s);
std::vector<double> y_theta_path(const MarketModel& model, const Strategy& s);
// int_0^t sum_j K^j(pi^j_s) ds for the given exponent.
std::vector<double> jump_K_path(const MarketModel& model, const Strategy& s, double gamma);

// ||f||_T = (int_0^T |f|^2)^{1/2} and (f, g)_T for vector paths on the grid.
double l2_norm(const TimeGrid& grid, const std::vector<Eigen::VectorXd>& f);
double l2_inner(const TimeGrid& grid, const std::vector<Eigen::VectorXd>& f, const std::vector<Eigen::VectorXd>& g);

}  // namespace jdrisk
