#include "retc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace retc {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

MatrixXd pseudo_solve(const MatrixXd& h, const VectorXd& rhs,
                      VectorXd* null_residual) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(h);
  const VectorXd& ev = es.eigenvalues();
  double lead = ev.size() ? std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)))
                          : 0.0;
  double thresh = 1e-11 * std::max(1.0, lead);
  VectorXd coeff = es.eigenvectors().transpose() * rhs;
  VectorXd sol_coeff = VectorXd::Zero(ev.size());
  VectorXd res_coeff = VectorXd::Zero(ev.size());
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) > thresh)
      sol_coeff(i) = coeff(i) / ev(i);
    else
      res_coeff(i) = coeff(i);
  }
  if (null_residual) *null_residual = es.eigenvectors() * res_coeff;
  return es.eigenvectors() * sol_coeff;
}

struct CoreOutcome {
  VectorXd x;
  std::vector<int> working_set;
  VectorXd multipliers;  // aligned with working_set
  bool converged = false;
  bool unbounded = false;
};

// Primal active-set iteration from a feasible start.
CoreOutcome active_set_core(const MatrixXd& h, const VectorXd& g,
                            const MatrixXd& c, const VectorXd& d, VectorXd x,
                            const NumericsConfig& cfg) {
  const int n = static_cast<int>(h.rows());
  const int m = static_cast<int>(c.rows());
  std::vector<int> working;
  CoreOutcome out;

  int degenerate_steps = 0;
  for (int iter = 0; iter < cfg.qp_max_iterations; ++iter) {
    VectorXd grad = h * x + g;

    MatrixXd cw(static_cast<int>(working.size()), n);
    for (std::size_t i = 0; i < working.size(); ++i)
      cw.row(static_cast<int>(i)) = c.row(working[i]);

    MatrixXd z;
    Eigen::ColPivHouseholderQR<MatrixXd> qr;
    if (working.empty()) {
      z = MatrixXd::Identity(n, n);
    } else {
      qr.compute(cw.transpose());
      qr.setThreshold(1e-12);
      const int rank = static_cast<int>(qr.rank());
      MatrixXd q_full = qr.householderQ();
      z = q_full.rightCols(n - rank);
    }

    VectorXd p = VectorXd::Zero(n);
    double alpha_cap = 1.0;
    if (z.cols() > 0) {
      MatrixXd hz = z.transpose() * h * z;
      VectorXd rhs = -z.transpose() * grad;
      VectorXd flat;
      VectorXd pz = pseudo_solve(hz, rhs, &flat);
      if (flat.lpNorm<Eigen::Infinity>() >
          1e-9 * std::max(1.0, grad.lpNorm<Eigen::Infinity>())) {
        // Descent direction along which the cost is purely linear.
        p = z * flat;
        alpha_cap = kInf;
      } else {
        p = z * pz;
        alpha_cap = 1.0;
      }
    }

    if (p.lpNorm<Eigen::Infinity>() <= 1e-10 * std::max(1.0, x.lpNorm<Eigen::Infinity>())) {
      // Stationary on the working set; examine multipliers.
      VectorXd lambda = working.empty() ? VectorXd(0) : qr.solve(-grad).eval();
      int worst = -1;
      double worst_val = -1e-10;
      for (std::size_t i = 0; i < working.size(); ++i) {
        if (lambda(static_cast<int>(i)) < worst_val) {
          worst_val = lambda(static_cast<int>(i));
          worst = static_cast<int>(i);
        }
      }
      if (worst < 0) {
        out.x = x;
        out.working_set = working;
        out.multipliers = lambda;
        out.converged = true;
        return out;
      }
      working.erase(working.begin() + worst);
      continue;
    }

    // Ratio test against constraints outside the working set.
    double alpha = alpha_cap;
    int blocker = -1;
    for (int i = 0; i < m; ++i) {
      if (std::find(working.begin(), working.end(), i) != working.end())
        continue;
      double s = c.row(i).dot(p);
      if (s <= 1e-12 * std::max(1.0, p.lpNorm<Eigen::Infinity>())) continue;
      double slack = std::max(0.0, d(i) - c.row(i).dot(x));
      double a = slack / s;
      if (a < alpha - 1e-14) {
        alpha = a;
        blocker = i;
      }
    }
    if (std::isinf(alpha)) {
      out.x = x;
      out.unbounded = true;
      return out;
    }
    x += alpha * p;
    if (blocker >= 0) working.push_back(blocker);
    if (alpha <= 1e-14) {
      if (++degenerate_steps > m + n + 8) break;
    } else {
      degenerate_steps = 0;
    }
  }
  out.x = x;
  out.working_set = working;
  return out;
}

double objective(const QpProblem& p, const VectorXd& x) {
  return 0.5 * x.dot(p.hessian * x) + p.linear.dot(x) + p.constant;
}

}  // namespace

QpProblem::QpProblem(MatrixXd h, VectorXd g, MatrixXd c, VectorXd d,
                     double constant_term, const NumericsConfig& cfg)
    : hessian(std::move(h)),
      linear(std::move(g)),
      ineq_normals(std::move(c)),
      ineq_offsets(std::move(d)),
      constant(constant_term) {
  const int n = static_cast<int>(hessian.rows());
  if (hessian.cols() != n || linear.size() != n)
    throw std::invalid_argument("qp: inconsistent dimensions");
  if (ineq_normals.rows() != ineq_offsets.size() ||
      (ineq_normals.rows() > 0 && ineq_normals.cols() != n))
    throw std::invalid_argument("qp: inconsistent constraint dimensions");
  if (n > 0) {
    if ((hessian - hessian.transpose()).lpNorm<Eigen::Infinity>() >
        cfg.symmetry_tol)
      throw std::invalid_argument("qp: hessian not symmetric");
    hessian = 0.5 * (hessian + hessian.transpose());
    VectorXd ev = symmetric_eigenvalues(hessian, cfg);
    if (ev(0) < -cfg.psd_tol)
      throw std::invalid_argument("qp: hessian not positive semidefinite");
  }
}

QpResult solve_qp(const QpProblem& p, const NumericsConfig& cfg) {
  const int n = p.num_vars();
  const int m = p.num_constraints();
  QpResult result;

  if (n == 0) {
    int worst = -1;
    double worst_violation = cfg.qp_feasibility_tol;
    for (int i = 0; i < m; ++i) {
      if (-p.ineq_offsets(i) > worst_violation) {
        worst_violation = -p.ineq_offsets(i);
        worst = i;
      }
    }
    if (worst >= 0) {
      result.status = QpStatus::Infeasible;
      result.infeasibility_certificate = VectorXd::Zero(m);
      result.infeasibility_certificate(worst) = 1.0;
      return result;
    }
    result.status = QpStatus::Optimal;
    result.solution = VectorXd::Zero(0);
    result.value = p.constant;
    return result;
  }

  VectorXd x = VectorXd::Zero(n);
  if (m > 0) {
    double violation = (p.ineq_normals * x - p.ineq_offsets).maxCoeff();
    if (violation > cfg.qp_feasibility_tol) {
      // Phase one: minimize the uniform slack t with C x - t <= d.
      MatrixXd h1 = MatrixXd::Zero(n + 1, n + 1);
      h1(n, n) = 1.0;
      VectorXd g1 = VectorXd::Zero(n + 1);
      g1(n) = 1.0;
      MatrixXd c1(m, n + 1);
      c1 << p.ineq_normals, -VectorXd::Ones(m);
      VectorXd x1 = VectorXd::Zero(n + 1);
      x1(n) = violation;
      CoreOutcome phase1 = active_set_core(h1, g1, c1, p.ineq_offsets, x1, cfg);
      double t_star = phase1.x(n);
      if (!phase1.converged && t_star > cfg.qp_feasibility_tol) {
        result.status = QpStatus::MaxIterations;
        return result;
      }
      if (t_star > cfg.qp_feasibility_tol) {
        result.status = QpStatus::Infeasible;
        VectorXd cert = VectorXd::Zero(m);
        for (std::size_t i = 0; i < phase1.working_set.size(); ++i)
          cert(phase1.working_set[i]) =
              std::max(0.0, phase1.multipliers(static_cast<int>(i)));
        result.infeasibility_certificate = cert;
        return result;
      }
      x = phase1.x.head(n);
    }
  }

  CoreOutcome phase2 = active_set_core(p.hessian, p.linear, p.ineq_normals,
                                       p.ineq_offsets, x, cfg);
  if (phase2.unbounded)
    throw std::runtime_error("qp: objective unbounded below on feasible set");
  result.solution = phase2.x;
  result.value = objective(p, phase2.x);
  result.active_set = phase2.working_set;
  std::sort(result.active_set.begin(), result.active_set.end());
  if (!phase2.converged) {
    result.status = QpStatus::MaxIterations;
    return result;
  }

  // Optimality certificates: primal feasibility and KKT stationarity.
  double feas = 0.0;
  if (m > 0)
    feas = (p.ineq_normals * phase2.x - p.ineq_offsets).maxCoeff();
  VectorXd stat = p.hessian * phase2.x + p.linear;
  for (std::size_t i = 0; i < phase2.working_set.size(); ++i)
    stat += phase2.multipliers(static_cast<int>(i)) *
            p.ineq_normals.row(phase2.working_set[i]).transpose();
  if (feas > cfg.qp_feasibility_tol ||
      stat.lpNorm<Eigen::Infinity>() > cfg.qp_stationarity_tol) {
    result.status = QpStatus::MaxIterations;
    return result;
  }
  result.status = QpStatus::Optimal;
  return result;
}

VectorXd symmetric_eigenvalues(const MatrixXd& m, const NumericsConfig& cfg) {
  const int n = static_cast<int>(m.rows());
  if (m.cols() != n) throw std::invalid_argument("eigenvalues: not square");
  if ((m - m.transpose()).lpNorm<Eigen::Infinity>() > cfg.symmetry_tol)
    throw std::invalid_argument("eigenvalues: matrix not symmetric");
  MatrixXd a = 0.5 * (m + m.transpose());

  auto offdiag = [&]() {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < 128 && offdiag() > cfg.jacobi_offdiag_tol;
       ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        Eigen::JacobiRotation<double> rot;
        rot.makeJacobi(a, p, q);
        a.applyOnTheLeft(p, q, rot.transpose());
        a.applyOnTheRight(p, q, rot);
      }
    }
  }
  VectorXd ev = a.diagonal();
  std::sort(ev.data(), ev.data() + n);
  return ev;
}

double spectral_radius(const MatrixXd& a) {
  Eigen::EigenSolver<MatrixXd> es(a, false);
  double rho = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    rho = std::max(rho, std::abs(es.eigenvalues()(i)));
  return rho;
}

DareSolution dare_gain(const MatrixXd& a, const MatrixXd& b, const MatrixXd& q,
                       const MatrixXd& r, const NumericsConfig& cfg) {
  MatrixXd p = q;
  int iter = 0;
  for (; iter < cfg.dare_max_iterations; ++iter) {
    MatrixXd gain_denom = r + b.transpose() * p * b;
    MatrixXd next = q + a.transpose() * p * a -
                    a.transpose() * p * b * gain_denom.ldlt().solve(
                                                b.transpose() * p * a);
    next = 0.5 * (next + next.transpose());
    double delta = (next - p).lpNorm<Eigen::Infinity>();
    p = next;
    if (delta <= cfg.dare_tol) break;
  }
  if (iter >= cfg.dare_max_iterations) {
    std::ostringstream os;
    os << "dare: no convergence after " << cfg.dare_max_iterations
       << " iterations, |P|=" << p.lpNorm<Eigen::Infinity>();
    throw std::runtime_error(os.str());
  }
  DareSolution sol;
  sol.P = p;
  MatrixXd gain_denom = r + b.transpose() * p * b;
  sol.K = -gain_denom.ldlt().solve(b.transpose() * p * a);
  sol.iterations = iter + 1;
  MatrixXd residual = a.transpose() * p * a - p -
                      a.transpose() * p * b *
                          gain_denom.ldlt().solve(b.transpose() * p * a) +
                      q;
  sol.residual = residual.lpNorm<Eigen::Infinity>();
  double rho = spectral_radius(a + b * sol.K);
  if (rho >= 1.0) {
    std::ostringstream os;
    os << "dare: closed loop not Schur (spectral radius " << rho << ")";
    throw std::runtime_error(os.str());
  }
  return sol;
}

MatrixXd dlyap(const MatrixXd& a, const MatrixXd& q, const NumericsConfig& cfg) {
  double rho = spectral_radius(a);
  if (rho >= 1.0) {
    std::ostringstream os;
    os << "dlyap: matrix not Schur (spectral radius " << rho << ")";
    throw std::runtime_error(os.str());
  }
  MatrixXd s = q;
  MatrixXd m = a;
  for (int i = 0; i < 200; ++i) {
    if (m.lpNorm<Eigen::Infinity>() < 1e-16) break;
    s = s + m.transpose() * s * m;
    m = m * m;
  }
  s = 0.5 * (s + s.transpose());
  double residual =
      (a.transpose() * s * a - s + q).lpNorm<Eigen::Infinity>();
  if (residual > cfg.dlyap_residual_tol) {
    std::ostringstream os;
    os << "dlyap: residual " << residual << " above tolerance";
    throw std::runtime_error(os.str());
  }
  return s;
}

}  // namespace retc
