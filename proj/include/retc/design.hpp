#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "retc/invariant_sets.hpp"
#include "retc/system_model.hpp"
#include "retc/terminal_ingredients.hpp"
#include "retc/tightening.hpp"

namespace retc {

// Horizon and objective parameters of the scheduling-constrained problem.
struct OcpConfig {
  int N_bar = 6;
  int M = 1;  // cycle length, the base period of the token bucket
  int H = 1;  // maximum inter-transmission interval
  Eigen::MatrixXd S;  // weight on the initial held input

  void validate(const Eigen::MatrixXd& r) const;
};

// Everything the controller needs at runtime for one (actuator, H) choice.
struct SystemDesign {
  PlantModel plant;
  NetworkSpec net;
  ObserverDesign observer;
  FeedbackDesign feedback;
  TightenedSets tightened;
  TerminalDesign terminal;
  OcpConfig ocp;
};

// Gain overrides; absent entries are synthesized.
struct GainOverrides {
  std::optional<Eigen::MatrixXd> L;
  std::optional<Eigen::MatrixXd> K;
  std::optional<Eigen::MatrixXd> K_f;
};

// Full synthesis chain for one actuator tier: observer, control-error set
// (with the contractive set built for gain_horizon >= h so designs across a
// grid nest), constraint tightening, terminal ingredients.
SystemDesign synthesize_design(const PlantModel& plant, const NetworkSpec& net,
                               ActuatorKind kind, int h, int n_bar,
                               const Eigen::MatrixXd& s_weight,
                               double noise_weight = 1.0,
                               int gain_horizon = 0,
                               const GainOverrides& overrides = {});

// Re-runs every certification on an assembled design; returns the margins
// keyed by condition name, throws nothing.
struct DesignMargins {
  double estimation_rpi = 0.0;
  double control_rci = 0.0;
  double terminal_invariance = 0.0;
  double terminal_decrease = 0.0;
  bool all_pass(double tol_sets = 1e-9, double tol_terminal = 1e-8) const {
    return estimation_rpi >= -tol_sets && control_rci >= -tol_sets &&
           terminal_invariance >= -tol_terminal &&
           terminal_decrease >= -tol_terminal;
  }
};

DesignMargins verify_design(const SystemDesign& design);

}  // namespace retc
