#include "retc/design.hpp"

#include <sstream>
#include <stdexcept>

#include "retc/numerics.hpp"

namespace retc {

void OcpConfig::validate(const Eigen::MatrixXd& r) const {
  if (!(N_bar >= H && H >= M && M >= 1))
    throw std::invalid_argument(
        "ocp: need N_bar >= H >= M >= 1 for the cyclic horizon scheme");
  Eigen::VectorXd ev_s = symmetric_eigenvalues(S);
  if (ev_s(0) <= 0)
    throw std::invalid_argument("ocp: S must be positive definite");
  Eigen::MatrixXd gap = r - S;
  if (symmetric_eigenvalues(0.5 * (gap + gap.transpose()))(0) < -1e-12)
    throw std::invalid_argument("ocp: need R >= S");
}

SystemDesign synthesize_design(const PlantModel& plant, const NetworkSpec& net,
                               ActuatorKind kind, int h, int n_bar,
                               const Eigen::MatrixXd& s_weight,
                               double noise_weight, int gain_horizon,
                               const GainOverrides& overrides) {
  plant.validate();
  net.validate();
  SystemDesign design;
  design.plant = plant;
  design.net = net;
  design.ocp.N_bar = n_bar;
  design.ocp.M = static_cast<int>(net.base_period());
  design.ocp.H = h;
  design.ocp.S = s_weight;
  design.ocp.validate(plant.R);

  design.observer = overrides.L
                        ? make_observer_design(plant, *overrides.L)
                        : synthesize_observer(plant, noise_weight);

  const int horizon = std::max(h, gain_horizon);
  Eigen::MatrixXd k_p = overrides.K
                            ? *overrides.K
                            : synthesize_feedback_gain(plant, kind, horizon);
  design.feedback = compute_rci(plant, kind, k_p, design.observer, h, horizon);

  design.tightened = tighten(plant, design.observer.Psi,
                             design.feedback.Omega, design.feedback.KOmega);

  design.terminal =
      overrides.K_f
          ? make_terminal_design(plant, design.ocp.M, design.tightened,
                                 *overrides.K_f)
          : synthesize_terminal(plant, design.ocp.M, design.tightened);
  return design;
}

DesignMargins verify_design(const SystemDesign& design) {
  DesignMargins margins;
  margins.estimation_rpi = verify_estimation_rpi(design.observer, design.plant);
  margins.control_rci =
      verify_rci(design.feedback, design.plant, design.observer);
  auto [m1, m2] =
      verify_terminal(design.terminal, design.plant, design.tightened);
  margins.terminal_invariance = m1;
  margins.terminal_decrease = m2;
  return margins;
}

}  // namespace retc
