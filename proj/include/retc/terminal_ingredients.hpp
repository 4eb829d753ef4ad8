#pragma once

#include <Eigen/Dense>

#include <utility>

#include "retc/system_model.hpp"
#include "retc/tightening.hpp"

namespace retc {

// Terminal gain, cost and region for the M-step cyclic design. The gain
// closes the M-step lifted system, the cost certifies decrease over one
// cycle, the region is invariant under the M-step closed loop while the
// intermediate states respect the tightened constraints.
struct TerminalDesign {
  Eigen::MatrixXd K_f;
  Eigen::MatrixXd P_f;
  Polytope Xf_p;
  int M = 1;
  double invariance_margin = 0.0;  // containment conditions
  double decrease_margin = 0.0;    // matrix inequality, min eigenvalue
};

// (A^M, sum_j A^j B); reports controllability of the lifted pair.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> lifted_system(
    const PlantModel& plant, int m, bool* controllable = nullptr);

TerminalDesign synthesize_terminal(const PlantModel& plant, int m,
                                   const TightenedSets& tightened);
TerminalDesign make_terminal_design(const PlantModel& plant, int m,
                                    const TightenedSets& tightened,
                                    const Eigen::MatrixXd& k_f);

// (containment margin, decrease-inequality margin); both >= -1e-8 means
// the design is certified.
std::pair<double, double> verify_terminal(const TerminalDesign& design,
                                          const PlantModel& plant,
                                          const TightenedSets& tightened);

}  // namespace retc
