#pragma once

#include <Eigen/Dense>

#include "driftbandit/rng.hpp"

namespace testsupport {

inline Eigen::VectorXd random_unit_ball(int d, driftbandit::Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = n(rng);
  return v / v.norm() * std::pow(u(rng), 1.0 / d);
}

inline Eigen::MatrixXd basis(int d) { return Eigen::MatrixXd::Identity(d, d); }

}  // namespace testsupport
