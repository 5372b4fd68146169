#pragma once

#include <Eigen/Dense>

#include "jdrisk/market.hpp"

namespace jdrisk::testing {

inline Eigen::VectorXd vec1(double a) { return Eigen::VectorXd::Constant(1, a); }
inline Eigen::MatrixXd mat1(double a) { return Eigen::MatrixXd::Constant(1, 1, a); }

// One-asset constant-coefficient market on a uniform grid.
inline MarketModel market_1d(double r, double mu, double sigma, double lambda = 0.0,
                             JumpLaw law = JumpLaw::point_masses({{0.0, 1.0}}), double T = 1.0,
                             std::size_t nodes = 513) {
  JumpSpec jumps;
  jumps.assets.push_back({lambda, std::move(law)});
  return MarketModel(TimeGrid::uniform(T, nodes), CoefficientPath::constant(nodes, r, vec1(mu), mat1(sigma)),
                     std::move(jumps));
}

}  // namespace jdrisk::testing
