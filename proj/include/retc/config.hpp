#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "retc/design.hpp"
#include "retc/simulator.hpp"

namespace retc {

// Flat key/value run configuration. Keys are dotted (plant.A, network.g,
// sim.steps); matrices are bracketed row lists [1 0.1; 0 1]. Every field
// defaults to the double-integrator benchmark loop.
struct RunConfig {
  // plant block
  Eigen::MatrixXd A{{1.0, 0.1}, {0.0, 1.0}};
  Eigen::MatrixXd B{{0.005}, {0.1}};
  Eigen::MatrixXd C{{1.0, 0.0}};
  Eigen::MatrixXd Q = 10.0 * Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd R = Eigen::MatrixXd::Constant(1, 1, 1.0);
  Eigen::VectorXd x_min = Eigen::Vector2d(-20, -20);
  Eigen::VectorXd x_max = Eigen::Vector2d(20, 20);
  Eigen::VectorXd u_min = Eigen::VectorXd::Constant(1, -20.0);
  Eigen::VectorXd u_max = Eigen::VectorXd::Constant(1, 20.0);
  Eigen::VectorXd w_min = Eigen::Vector2d(-0.002, -0.002);
  Eigen::VectorXd w_max = Eigen::Vector2d(0.002, 0.002);
  Eigen::VectorXd v_min = Eigen::VectorXd::Constant(1, -0.001);
  Eigen::VectorXd v_max = Eigen::VectorXd::Constant(1, 0.001);

  // network block
  long g = 1, c = 3, b = 10, beta0 = 10;

  // design block
  std::vector<ActuatorKind> kinds = {ActuatorKind::Zoh,
                                     ActuatorKind::PredictionBased,
                                     ActuatorKind::LocalMeasurement};
  std::vector<int> h_values = {3, 4, 5, 6};
  double noise_weight = 1.0;
  std::optional<Eigen::MatrixXd> gain_L;
  std::optional<Eigen::MatrixXd> gain_K;
  std::optional<Eigen::MatrixXd> gain_Kf;

  // ocp block
  int n_bar = 6;
  Eigen::MatrixXd S = Eigen::MatrixXd::Constant(1, 1, 1e-6);

  // sim block
  int steps = 51;
  DisturbanceMode disturbance = DisturbanceMode::ExtremalSwitching;
  uint64_t seed = 1;
  Eigen::VectorXd x0 = Eigen::Vector2d(6, -2);
  Eigen::VectorXd u_s0 = Eigen::VectorXd::Zero(1);
  std::optional<Eigen::VectorXd> xhat0;  // defaults to x0
  ActuatorKind sim_actuator = ActuatorKind::Zoh;
  int sim_h = 5;
  bool strict = true;

  static RunConfig parse_file(const std::string& path);
  static RunConfig parse_text(const std::string& text);
  std::string serialize() const;

  PlantModel plant_model() const;
  NetworkSpec network() const;
  SimConfig sim_config() const;
  GainOverrides overrides() const;
};

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace retc
