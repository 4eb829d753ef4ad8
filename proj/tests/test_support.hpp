#pragma once

// Shared fixtures: the disturbed double-integrator benchmark loop.

#include <Eigen/Dense>

#include "retc/polytope.hpp"
#include "retc/system_model.hpp"

namespace retc::testing {

inline PlantModel benchmark_plant() {
  PlantModel plant;
  plant.A = Eigen::MatrixXd{{1.0, 0.1}, {0.0, 1.0}};
  plant.B = Eigen::MatrixXd{{0.005}, {0.1}};
  plant.C = Eigen::MatrixXd{{1.0, 0.0}};
  plant.Q = 10.0 * Eigen::MatrixXd::Identity(2, 2);
  plant.R = Eigen::MatrixXd::Constant(1, 1, 1.0);
  plant.X = Polytope::from_box(Eigen::Vector2d(-20, -20), Eigen::Vector2d(20, 20));
  plant.U = Polytope::from_box(Eigen::VectorXd::Constant(1, -20.0),
                               Eigen::VectorXd::Constant(1, 20.0));
  plant.W = Polytope::from_box(Eigen::Vector2d(-0.002, -0.002),
                               Eigen::Vector2d(0.002, 0.002));
  plant.V = Polytope::from_box(Eigen::VectorXd::Constant(1, -0.001),
                               Eigen::VectorXd::Constant(1, 0.001));
  return plant;
}

inline NetworkSpec benchmark_network() {
  NetworkSpec net;
  net.g = 1;
  net.c = 3;
  net.b = 10;
  net.beta0 = 10;
  return net;
}

}  // namespace retc::testing
