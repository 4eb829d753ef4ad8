#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "retc/polytope.hpp"
#include "retc/system_model.hpp"

namespace retc {

// Actuator capability tiers; they determine which error feedback is
// realizable and with it the shape of the control-error invariant set.
enum class ActuatorKind { Zoh, PredictionBased, LocalMeasurement };

const char* to_string(ActuatorKind kind);
ActuatorKind actuator_kind_from_string(const std::string& name);

// Observer gain with the estimation-error invariant set Psi and the induced
// disturbance set Delta = L (C Psi + V) seen by the control error.
struct ObserverDesign {
  Eigen::MatrixXd L;
  Polytope Psi;
  Polytope Delta;
  double rpi_margin = 0.0;
};

// Error-feedback gain with its control-error invariant set for a given
// maximum open-loop length H.
struct FeedbackDesign {
  ActuatorKind kind = ActuatorKind::Zoh;
  Eigen::MatrixXd K;
  Polytope Omega;
  int H = 1;
  Polytope KOmega;  // image K * Omega, used for input tightening
  double rci_margin = 0.0;

  // u_s block of the full control-error set: K*Omega when the update is
  // held at the actuator, {0} when the actuator regenerates it locally.
  Polytope omega_us_block(int mp) const;
};

// Sum of A^j B for j in [0, i); the i-step input accumulation of a held
// actuator value.
Eigen::MatrixXd b_power(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                        int i);

// Outer approximation of the minimal robust invariant set of
// x+ = a_cl x + d, d in dist: find the smallest j with a_cl^j D inside
// alpha D, then scale the truncated disturbance sum by 1/(1-alpha).
Polytope mrpi_outer_approximation(const Eigen::MatrixXd& a_cl,
                                  const Polytope& dist,
                                  double alpha_target = 1e-3,
                                  int max_power = 200);

// Observer gain from the dual Riccati equation plus the invariant set of
// the estimation error. Throws if the invariance condition fails to verify.
ObserverDesign synthesize_observer(const PlantModel& plant,
                                   double noise_weight = 1.0);
ObserverDesign make_observer_design(const PlantModel& plant,
                                    const Eigen::MatrixXd& L);

// Margin of (A - LC) Psi + W + (-L V) inside Psi; >= -1e-9 means verified.
double verify_estimation_rpi(const ObserverDesign& design,
                             const PlantModel& plant);

// Feasibility of the block matrices [[X, A^i X + B^i Y], [., lambda X]]
// >= 0 for all i in [1, H]; the certificate behind the held-gain search.
bool verify_zoh_lmi(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                    double lambda, const PlantModel& plant, int h);

// Gain candidate for the given actuator tier. For the held actuator the
// candidate must pass the certificate above.
Eigen::MatrixXd synthesize_feedback_gain(const PlantModel& plant,
                                         ActuatorKind kind, int h);

// Control-error invariant set construction. Hold-based actuators use the
// contractive-set recipe (contractive E, disturbance scalings delta_i,
// Omega = max_i delta_i/(1-lambda_i) * E); the locally-measuring actuator
// uses the minimal-RPI outer approximation. The invariance condition is
// re-verified before returning.
//
// contractive_horizon extends the family the contractive set is built for
// (a set contractive up to max(h, contractive_horizon) steps is contractive
// for the first h as well); sharing one set across a grid of H values keeps
// the resulting designs nested. Scalings and verification always use [1, h].
FeedbackDesign compute_rci(const PlantModel& plant, ActuatorKind kind,
                           const Eigen::MatrixXd& k_p,
                           const ObserverDesign& observer, int h,
                           int contractive_horizon = 0);

// Minimum containment margin of the invariance condition over i in [1, H].
double verify_rci(const FeedbackDesign& design, const PlantModel& plant,
                  const ObserverDesign& observer);

// (u_c, u_e) for one step, per actuator tier and transmission flag.
std::pair<Eigen::VectorXd, Eigen::VectorXd> error_feedback(
    ActuatorKind kind, int gamma, const Eigen::VectorXd& nu_c,
    const Eigen::VectorXd& xhat_p, const Eigen::VectorXd& xtilde_p,
    const Eigen::VectorXd& xbar_p, const Eigen::MatrixXd& k_p);

// Closed maps of the i-step hold family: A^i + B^i K for the held update,
// (A + B K)^i for locally regenerated feedback.
std::vector<Eigen::MatrixXd> error_map_family(const PlantModel& plant,
                                              ActuatorKind kind,
                                              const Eigen::MatrixXd& k_p,
                                              int h);

}  // namespace retc
