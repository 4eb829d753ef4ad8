#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "retc/design.hpp"
#include "retc/ocp.hpp"

namespace retc {

enum class DisturbanceMode { Zero, ExtremalFixed, ExtremalSwitching, UniformRandom };

const char* to_string(DisturbanceMode mode);
DisturbanceMode disturbance_mode_from_string(const std::string& name);

struct SimConfig {
  int steps = 51;
  DisturbanceMode mode = DisturbanceMode::ExtremalSwitching;
  uint64_t seed = 1;
  Eigen::VectorXd x_p0;
  Eigen::VectorXd u_s0;
  Eigen::VectorXd xhat0;
  bool strict = true;
  // Scales sampled disturbances; > 1 pushes them outside the modeled bound
  // (used for fault injection, forces permissive checking).
  double fault_scale = 1.0;
};

// One executed step: the states seen at time k, the applied input, and the
// solver summary.
struct StepRecord {
  long k = 0;
  NcsState x;
  NcsState xhat;
  NcsState xtilde;
  NcsState xbar;
  NcsInput u;
  Schedule schedule;
  int s = 0;
  int N = 0;
  double ocp_value = 0.0;
  bool feasible = true;
  bool w_violation = false;
  bool v_violation = false;
};

struct SimTrace {
  std::vector<StepRecord> steps;  // k = 0 .. steps-1
  NcsState final_x, final_xhat, final_xtilde, final_xbar;
  int final_s = 0;
};

// Disturbance/noise pair for time k under the given mode. Extremal modes
// pick the vertex maximizing (switching: alternating with) the all-ones
// direction; the random mode rejects uniform box samples into the sets.
std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_uncertainty(
    DisturbanceMode mode, long k, const Polytope& w_set, const Polytope& v_set,
    std::mt19937_64& rng);

// Algorithm: solve the schedule-constrained problem, apply the first move
// through the actuator-specific error feedback, advance plant, observer,
// auxiliary predictor and nominal system, and keep the transmission counter.
SimTrace run_closed_loop(const SystemDesign& design, const SimConfig& cfg);

struct PropertyCheck {
  std::string name;
  bool pass = true;
  double margin = 0.0;  // most adverse margin observed
  std::string detail;
};

struct PropertyReport {
  std::vector<PropertyCheck> checks;
  bool all_pass() const;
  int transmissions = 0;
  int max_gap = 0;
};

// Feasibility everywhere, real-state/input/bucket constraint satisfaction,
// tube containment of observer and real state, inter-transmission gaps,
// and the convergence surrogate over the final window.
PropertyReport check_trace(const SimTrace& trace, const SystemDesign& design);

// Columns: k, x_p, u_s, beta, xhat_p, xbar_p, xtilde_p, u_c, gamma, u_e, s,
// N, ocp_value, feasible; reals at 17 significant digits.
void write_trace_csv(std::ostream& os, const SimTrace& trace,
                     const SystemDesign& design);
std::string trace_csv(const SimTrace& trace, const SystemDesign& design);

}  // namespace retc
