#include "retc/terminal_ingredients.hpp"

#include <limits>
#include <sstream>
#include <stdexcept>

#include "retc/invariant_sets.hpp"
#include "retc/numerics.hpp"

namespace retc {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd matrix_power(const MatrixXd& a, int i) {
  MatrixXd acc = MatrixXd::Identity(a.rows(), a.cols());
  for (int j = 0; j < i; ++j) acc = a * acc;
  return acc;
}

// Closed maps x -> (A^i + B^i K_f) x for i in [0, M]; index 0 is identity.
std::vector<MatrixXd> cycle_maps(const PlantModel& plant, const MatrixXd& k_f,
                                 int m) {
  std::vector<MatrixXd> maps;
  maps.reserve(m + 1);
  maps.push_back(MatrixXd::Identity(plant.np(), plant.np()));
  for (int i = 1; i <= m; ++i)
    maps.push_back(matrix_power(plant.A, i) +
                   b_power(plant.A, plant.B, i) * k_f);
  return maps;
}

// Accumulated stage weight of one cycle under the held terminal control:
// sum_i (A^i + B^i K_f)' Q (A^i + B^i K_f) + M K_f' R K_f.
MatrixXd cycle_cost(const PlantModel& plant, const MatrixXd& k_f, int m) {
  auto maps = cycle_maps(plant, k_f, m);
  MatrixXd acc = MatrixXd::Zero(plant.np(), plant.np());
  for (int i = 0; i < m; ++i) acc += maps[i].transpose() * plant.Q * maps[i];
  acc += m * k_f.transpose() * plant.R * k_f;
  return 0.5 * (acc + acc.transpose());
}

}  // namespace

std::pair<MatrixXd, MatrixXd> lifted_system(const PlantModel& plant, int m,
                                            bool* controllable) {
  if (m < 1) throw std::invalid_argument("lifted_system: M must be >= 1");
  MatrixXd a_m = matrix_power(plant.A, m);
  MatrixXd b_m = b_power(plant.A, plant.B, m);
  if (controllable) {
    const int n = plant.np();
    MatrixXd ctrb(n, n * b_m.cols());
    MatrixXd block = b_m;
    for (int i = 0; i < n; ++i) {
      ctrb.middleCols(i * b_m.cols(), b_m.cols()) = block;
      block = a_m * block;
    }
    *controllable = Eigen::FullPivLU<MatrixXd>(ctrb).rank() == n;
  }
  return {a_m, b_m};
}

TerminalDesign make_terminal_design(const PlantModel& plant, int m,
                                    const TightenedSets& tightened,
                                    const MatrixXd& k_f) {
  TerminalDesign design;
  design.M = m;
  design.K_f = k_f;
  auto [a_m, b_m] = lifted_system(plant, m);
  MatrixXd closed = a_m + b_m * k_f;
  design.P_f = dlyap(closed, cycle_cost(plant, k_f, m));

  // Constraint-admissible region for the cycle: every intermediate state in
  // the tightened state set, the held input in the tightened input set.
  std::vector<Halfspace> facets;
  auto maps = cycle_maps(plant, k_f, m);
  for (int i = 0; i < m; ++i) {
    for (const auto& h : tightened.Xbar_p.halfspaces()) {
      VectorXd pulled = maps[i].transpose() * h.normal;
      if (pulled.lpNorm<Eigen::Infinity>() <= 1e-12) continue;
      facets.push_back({pulled, h.offset});
    }
  }
  for (const auto& h : tightened.Ubar_p.halfspaces()) {
    VectorXd pulled = k_f.transpose() * h.normal;
    if (pulled.lpNorm<Eigen::Infinity>() <= 1e-12) continue;
    facets.push_back({pulled, h.offset});
  }
  Polytope admissible = intersect_halfspaces(plant.np(), std::move(facets));
  if (admissible.is_empty())
    throw std::runtime_error("terminal: admissible cycle set is empty");

  // Maximal invariant subset under the M-step closed map.
  Polytope s = admissible;
  bool settled = false;
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<Halfspace> next_facets = s.halfspaces();
    for (const auto& h : s.halfspaces()) {
      VectorXd pulled = closed.transpose() * h.normal;
      if (pulled.lpNorm<Eigen::Infinity>() <= 1e-12) continue;
      next_facets.push_back({pulled, h.offset});
    }
    Polytope next = intersect_halfspaces(plant.np(), std::move(next_facets));
    if (next.is_empty())
      throw std::runtime_error("terminal: invariant region is empty");
    if (is_subset(s, next)) {
      settled = true;
      s = std::move(next);
      break;
    }
    s = std::move(next);
  }
  if (!settled)
    throw std::runtime_error(
        "terminal: invariant-region iteration did not settle");
  design.Xf_p = std::move(s);

  auto [m1, m2] = verify_terminal(design, plant, tightened);
  design.invariance_margin = m1;
  design.decrease_margin = m2;
  if (m1 < -1e-8 || m2 < -1e-8) {
    std::ostringstream os;
    os << "terminal: certification failed (containment " << m1
       << ", decrease " << m2 << ")";
    throw std::runtime_error(os.str());
  }
  return design;
}

TerminalDesign synthesize_terminal(const PlantModel& plant, int m,
                                   const TightenedSets& tightened) {
  auto [a_m, b_m] = lifted_system(plant, m);
  MatrixXd k_f = dare_gain(a_m, b_m, plant.Q, m * plant.R).K;
  return make_terminal_design(plant, m, tightened, k_f);
}

std::pair<double, double> verify_terminal(const TerminalDesign& design,
                                          const PlantModel& plant,
                                          const TightenedSets& tightened) {
  const int m = design.M;
  auto maps = cycle_maps(plant, design.K_f, m);
  double margin1 = std::numeric_limits<double>::infinity();
  double piece = 0.0;

  is_subset(design.Xf_p, tightened.Xbar_p, &piece);
  margin1 = std::min(margin1, piece);
  is_subset(linear_image(design.K_f, design.Xf_p), tightened.Ubar_p, &piece);
  margin1 = std::min(margin1, piece);
  for (int i = 1; i < m; ++i) {
    is_subset(linear_image(maps[i], design.Xf_p), tightened.Xbar_p, &piece);
    margin1 = std::min(margin1, piece);
  }
  is_subset(linear_image(maps[m], design.Xf_p), design.Xf_p, &piece);
  margin1 = std::min(margin1, piece);

  // Decrease inequality as the smallest eigenvalue of
  // P - A_cl' P A_cl - cycle cost.
  MatrixXd gap = design.P_f - maps[m].transpose() * design.P_f * maps[m] -
                 cycle_cost(plant, design.K_f, m);
  gap = 0.5 * (gap + gap.transpose());
  double margin2 = symmetric_eigenvalues(gap)(0);
  return {margin1, margin2};
}

}  // namespace retc
