#pragma once

#include <Eigen/Dense>

#include "retc/polytope.hpp"

namespace retc {

// Perturbed LTI plant x+ = A x + B u + w, y = C x + v with box/polytopic
// constraint and uncertainty sets and quadratic stage weights.
struct PlantModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  Polytope X;  // state constraint
  Polytope U;  // input constraint
  Polytope W;  // disturbance bound
  Polytope V;  // measurement noise bound
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;

  int np() const { return static_cast<int>(A.rows()); }
  int mp() const { return static_cast<int>(B.cols()); }
  int qp() const { return static_cast<int>(C.rows()); }

  // Dimension consistency, stabilizability/detectability, positive definite
  // weights, C-set flags on the uncertainty sets.
  void validate() const;
};

// Token bucket traffic specification: gain g per step, cost c per
// transmission, capacity b.
struct NetworkSpec {
  long g = 1;
  long c = 1;
  long b = 1;
  long beta0 = 0;

  long base_period() const { return (c + g - 1) / g; }
  void validate() const;
};

// Overall state [x_p; u_s; beta] of the networked loop.
struct NcsState {
  Eigen::VectorXd x_p;
  Eigen::VectorXd u_s;
  long beta = 0;
};

// Overall input [u_c; gamma; u_e].
struct NcsInput {
  Eigen::VectorXd u_c;
  int gamma = 0;
  Eigen::VectorXd u_e;
};

enum class CheckMode { Strict, Permissive };

// beta+ = min(beta + g - gamma*c, b); transmitting without sufficient
// tokens is a protocol violation and throws.
long token_bucket_step(long beta, int gamma, const NetworkSpec& net);

// One step of the overall dynamics. In strict mode an out-of-bound
// disturbance aborts; in permissive mode it is flagged via `violation`.
NcsState ncs_step(const NcsState& x, const NcsInput& u,
                  const Eigen::VectorXd& w_p, const PlantModel& plant,
                  const NetworkSpec& net, CheckMode mode = CheckMode::Strict,
                  bool* violation = nullptr);

// Luenberger update x̂+ = A x̂ + B u_p + L (y - C x̂).
Eigen::VectorXd observer_step(const Eigen::VectorXd& xhat_p,
                              const Eigen::VectorXd& u_p,
                              const Eigen::VectorXd& y_p,
                              const Eigen::MatrixXd& L,
                              const PlantModel& plant);

Eigen::VectorXd plant_output(const Eigen::VectorXd& x_p,
                             const Eigen::VectorXd& v_p,
                             const PlantModel& plant,
                             CheckMode mode = CheckMode::Strict,
                             bool* violation = nullptr);

}  // namespace retc
