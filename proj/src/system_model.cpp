#include "retc/system_model.hpp"

#include <Eigen/Eigenvalues>

#include <sstream>
#include <stdexcept>

#include "retc/numerics.hpp"

namespace retc {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// PBH test: rank [A - lambda I, B] = n for every eigenvalue with
// |lambda| >= 1.
bool pbh_stabilizable(const MatrixXd& a, const MatrixXd& b) {
  const int n = static_cast<int>(a.rows());
  Eigen::EigenSolver<MatrixXd> es(a);
  for (int i = 0; i < n; ++i) {
    std::complex<double> lambda = es.eigenvalues()(i);
    if (std::abs(lambda) < 1.0 - 1e-9) continue;
    Eigen::MatrixXcd pencil(n, n + b.cols());
    pencil << a.cast<std::complex<double>>() -
                  lambda * Eigen::MatrixXcd::Identity(n, n),
        b.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pencil);
    if (svd.singularValues()(n - 1) < 1e-9) return false;
  }
  return true;
}

void require_positive_definite(const MatrixXd& m, const char* name) {
  VectorXd ev = symmetric_eigenvalues(m);
  if (ev(0) <= 0) {
    std::ostringstream os;
    os << name << " must be positive definite (min eigenvalue " << ev(0)
       << ")";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

void PlantModel::validate() const {
  const int n = np(), m = mp(), q = qp();
  if (A.cols() != n || B.rows() != n || C.cols() != n)
    throw std::invalid_argument("plant: inconsistent matrix dimensions");
  if (X.dim() != n || U.dim() != m || W.dim() != n || V.dim() != q)
    throw std::invalid_argument("plant: inconsistent set dimensions");
  if (Q.rows() != n || Q.cols() != n || R.rows() != m || R.cols() != m)
    throw std::invalid_argument("plant: inconsistent weight dimensions");
  require_positive_definite(Q, "Q");
  require_positive_definite(R, "R");
  if (!W.is_cset() || !V.is_cset())
    throw std::invalid_argument("plant: W and V must be C sets");
  if (!X.contains_origin() || !U.contains_origin())
    throw std::invalid_argument("plant: X and U must contain the origin");
  if (!pbh_stabilizable(A, B))
    throw std::invalid_argument("plant: (A, B) not stabilizable");
  if (!pbh_stabilizable(A.transpose(), C.transpose()))
    throw std::invalid_argument("plant: (A, C) not detectable");
}

void NetworkSpec::validate() const {
  if (g < 1) throw std::invalid_argument("network: g must be >= 1");
  if (c < g) throw std::invalid_argument("network: c must be >= g");
  if (b < c) throw std::invalid_argument("network: b must be >= c");
  if (beta0 < 0 || beta0 > b)
    throw std::invalid_argument("network: beta0 must lie in [0, b]");
  if (beta0 < c - g)
    throw std::invalid_argument(
        "network: beta0 must be >= c - g to allow a transmission at time 0");
}

long token_bucket_step(long beta, int gamma, const NetworkSpec& net) {
  if (gamma != 0 && gamma != 1)
    throw std::invalid_argument("token bucket: gamma must be binary");
  if (gamma == 1 && beta + net.g - net.c < 0) {
    std::ostringstream os;
    os << "token bucket: transmission with insufficient tokens (beta=" << beta
       << ", g=" << net.g << ", c=" << net.c << ")";
    throw std::runtime_error(os.str());
  }
  return std::min(beta + net.g - gamma * net.c, net.b);
}

NcsState ncs_step(const NcsState& x, const NcsInput& u, const VectorXd& w_p,
                  const PlantModel& plant, const NetworkSpec& net,
                  CheckMode mode, bool* violation) {
  if (violation) *violation = false;
  if (!plant.W.contains_point(w_p)) {
    if (mode == CheckMode::Strict)
      throw std::runtime_error("ncs_step: disturbance outside W");
    if (violation) *violation = true;
  }
  VectorXd applied = (1 - u.gamma) * x.u_s + u.gamma * u.u_c + u.u_e;
  NcsState next;
  next.x_p = plant.A * x.x_p + plant.B * applied + w_p;
  next.u_s = (1 - u.gamma) * x.u_s + u.gamma * u.u_c;
  next.beta = token_bucket_step(x.beta, u.gamma, net);
  return next;
}

VectorXd observer_step(const VectorXd& xhat_p, const VectorXd& u_p,
                       const VectorXd& y_p, const MatrixXd& L,
                       const PlantModel& plant) {
  return plant.A * xhat_p + plant.B * u_p + L * (y_p - plant.C * xhat_p);
}

VectorXd plant_output(const VectorXd& x_p, const VectorXd& v_p,
                      const PlantModel& plant, CheckMode mode,
                      bool* violation) {
  if (violation) *violation = false;
  if (!plant.V.contains_point(v_p)) {
    if (mode == CheckMode::Strict)
      throw std::runtime_error("plant_output: noise outside V");
    if (violation) *violation = true;
  }
  return plant.C * x_p + v_p;
}

}  // namespace retc
