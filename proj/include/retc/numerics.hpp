#pragma once

#include <Eigen/Dense>

#include <vector>

namespace retc {

// Centralized numeric tolerances for the dense kernels.
struct NumericsConfig {
  double qp_feasibility_tol = 1e-8;
  double qp_stationarity_tol = 1e-7;
  int qp_max_iterations = 500;
  double psd_tol = 1e-9;
  double symmetry_tol = 1e-10;
  double jacobi_offdiag_tol = 1e-12;
  double dare_tol = 1e-12;
  int dare_max_iterations = 10000;
  double dlyap_residual_tol = 1e-10;
};

enum class QpStatus { Optimal, Infeasible, MaxIterations };

// min 1/2 x'Hx + g'x + constant  s.t.  ineq_normals * x <= ineq_offsets.
// The hessian must be PSD; this is validated at construction.
struct QpProblem {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd linear;
  Eigen::MatrixXd ineq_normals;
  Eigen::VectorXd ineq_offsets;
  double constant = 0.0;

  QpProblem()
      : hessian(0, 0), linear(0), ineq_normals(0, 0), ineq_offsets(0) {}
  QpProblem(Eigen::MatrixXd h, Eigen::VectorXd g, Eigen::MatrixXd c,
            Eigen::VectorXd d, double constant_term = 0.0,
            const NumericsConfig& cfg = {});
  int num_vars() const { return static_cast<int>(hessian.rows()); }
  int num_constraints() const { return static_cast<int>(ineq_normals.rows()); }
};

struct QpResult {
  QpStatus status = QpStatus::Infeasible;
  Eigen::VectorXd solution;
  double value = 0.0;
  std::vector<int> active_set;
  // Farkas multipliers (y >= 0, C'y = 0, y'd < 0) when Infeasible.
  Eigen::VectorXd infeasibility_certificate;
};

// Primal active-set method with a phase-one feasibility subproblem.
QpResult solve_qp(const QpProblem& p, const NumericsConfig& cfg = {});

// All eigenvalues of a symmetric matrix via cyclic Jacobi rotations,
// ascending order.
Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& m,
                                      const NumericsConfig& cfg = {});

double spectral_radius(const Eigen::MatrixXd& a);

struct DareSolution {
  Eigen::MatrixXd P;
  Eigen::MatrixXd K;  // A + B*K is Schur
  int iterations = 0;
  double residual = 0.0;
};

// Fixed-point iteration of the discrete-time Riccati recursion.
DareSolution dare_gain(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                       const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                       const NumericsConfig& cfg = {});

// P solving A'PA - P + Q = 0 for Schur A, via the doubling series.
Eigen::MatrixXd dlyap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q,
                      const NumericsConfig& cfg = {});

}  // namespace retc
