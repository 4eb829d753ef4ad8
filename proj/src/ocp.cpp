#include "retc/ocp.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace retc {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void append_all_words(int n, std::vector<Schedule>& out) {
  const unsigned long long total = 1ULL << n;
  for (unsigned long long w = 0; w < total; ++w) {
    Schedule s;
    s.bits.resize(n);
    for (int i = 0; i < n; ++i) s.bits[i] = (w >> (n - 1 - i)) & 1ULL;
    out.push_back(std::move(s));
  }
}

// (Fz + f)' Wt (Fz + f) accumulated into 1/2 z'Hz + g'z + c0.
void add_quadratic(const MatrixXd& f_map, const VectorXd& f_off,
                   const MatrixXd& wt, MatrixXd& h, VectorXd& g, double& c0) {
  h += 2.0 * f_map.transpose() * wt * f_map;
  g += 2.0 * f_map.transpose() * wt * f_off;
  c0 += f_off.dot(wt * f_off);
}

struct RowSet {
  std::vector<VectorXd> normals;
  std::vector<double> offsets;
  bool constant_violation = false;

  void add(const VectorXd& a, double b) {
    if (a.lpNorm<Eigen::Infinity>() <= 1e-12) {
      if (b < -1e-9) constant_violation = true;
      return;
    }
    for (std::size_t i = 0; i < normals.size(); ++i) {
      if ((normals[i] - a).lpNorm<Eigen::Infinity>() <= 1e-12 &&
          std::abs(offsets[i] - b) <= 1e-12)
        return;
    }
    normals.push_back(a);
    offsets.push_back(b);
  }
};

}  // namespace

int Schedule::transmissions() const {
  int n = 0;
  for (uint8_t b : bits) n += b;
  return n;
}

unsigned long long Schedule::word() const {
  unsigned long long w = 0;
  for (uint8_t b : bits) w = (w << 1) | b;
  return w;
}

std::string Schedule::to_string() const {
  std::string s;
  s.reserve(bits.size());
  for (uint8_t b : bits) s.push_back(b ? '1' : '0');
  return s;
}

int horizon(long k, const OcpConfig& cfg) {
  if (k < 0) throw std::invalid_argument("horizon: k must be nonnegative");
  return cfg.N_bar - static_cast<int>(k % cfg.M);
}

std::vector<Schedule> enumerate_schedules(int n, int h, int s) {
  if (n < 1 || h < 1 || s < 0)
    throw std::invalid_argument("enumerate_schedules: bad arguments");
  std::vector<Schedule> out;
  if (n <= h - s - 1) {
    // Short horizons are exempt from the transmission requirement.
    append_all_words(n, out);
    return out;
  }
  std::vector<uint8_t> bits(n, 0);
  // Depth-first generation, zeros before ones, with gap pruning.
  struct Rec {
    int n, h, first_bound;
    std::vector<Schedule>& out;
    std::vector<uint8_t>& bits;
    void operator()(int pos, int last_tx) {
      if (pos == n) {
        if (last_tx >= 0 && n - last_tx <= h - 1) out.push_back({bits});
        return;
      }
      bool zero_ok = last_tx < 0 ? pos < first_bound : pos - last_tx < h;
      if (zero_ok) {
        bits[pos] = 0;
        (*this)(pos + 1, last_tx);
      }
      bool one_ok = last_tx < 0 ? pos <= first_bound : pos - last_tx <= h;
      if (one_ok) {
        bits[pos] = 1;
        (*this)(pos + 1, pos);
        bits[pos] = 0;
      }
    }
  } rec{n, h, h - s - 1, out, bits};
  rec(0, -1);
  return out;
}

bool bucket_feasible(const Schedule& schedule, long beta0,
                     const NetworkSpec& net, bool terminal) {
  if (beta0 < 0 || beta0 > net.b)
    throw std::invalid_argument("bucket_feasible: beta0 out of range");
  long beta = beta0;
  for (uint8_t bit : schedule.bits) {
    if (bit && beta + net.g - net.c < 0) return false;
    beta = std::min(beta + net.g - (bit ? net.c : 0), net.b);
  }
  return !terminal || beta >= net.c - net.g;
}

std::vector<NcsState> CondensedOcp::decode_states(const VectorXd& z) const {
  std::vector<NcsState> states;
  states.reserve(N + 1);
  for (int i = 0; i <= N; ++i)
    states.push_back({x_map[i] * z + x_off[i], us_map[i] * z + us_off[i],
                      beta[i]});
  return states;
}

std::vector<NcsInput> CondensedOcp::decode_inputs(const VectorXd& z) const {
  const int mp = static_cast<int>(us_map[0].rows());
  std::vector<NcsInput> inputs;
  inputs.reserve(N);
  for (int i = 0; i < N; ++i) {
    NcsInput u;
    u.gamma = schedule.bits[i];
    u.u_c = u.gamma ? VectorXd(z.segment(uc_index[i], mp))
                    : VectorXd(VectorXd::Zero(mp));
    u.u_e = VectorXd::Zero(mp);
    inputs.push_back(std::move(u));
  }
  return inputs;
}

CondensedOcp build_qp(const SystemDesign& design, const Schedule& schedule,
                      const NcsState& xhat, const NcsState& xbar_prev, int n) {
  const PlantModel& plant = design.plant;
  const int np = plant.np();
  const int mp = plant.mp();
  const bool gamma0 = schedule.bits.at(0) != 0;
  const bool held_us_decision =
      gamma0 && design.feedback.kind == ActuatorKind::Zoh;

  CondensedOcp c;
  c.schedule = schedule;
  c.N = n;

  // Decision layout: [x_p(0); u_s(0) (held actuator only)] then one control
  // update per scheduled transmission.
  int nz = 0;
  if (gamma0) {
    nz += np;
    if (held_us_decision) nz += mp;
  }
  c.uc_index.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    if (schedule.bits[i]) {
      c.uc_index[i] = nz;
      nz += mp;
    }
  }

  c.x_map.resize(n + 1);
  c.x_off.resize(n + 1);
  c.us_map.resize(n + 1);
  c.us_off.resize(n + 1);
  if (gamma0) {
    c.x_map[0] = MatrixXd::Zero(np, nz);
    c.x_map[0].leftCols(np) = MatrixXd::Identity(np, np);
    c.x_off[0] = VectorXd::Zero(np);
    c.us_map[0] = MatrixXd::Zero(mp, nz);
    if (held_us_decision) {
      c.us_map[0].middleCols(np, mp) = MatrixXd::Identity(mp, mp);
      c.us_off[0] = VectorXd::Zero(mp);
    } else {
      c.us_off[0] = xhat.u_s;  // regenerating actuators pin u_s(0)
    }
  } else {
    c.x_map[0] = MatrixXd::Zero(np, nz);
    c.x_off[0] = xbar_prev.x_p;
    c.us_map[0] = MatrixXd::Zero(mp, nz);
    c.us_off[0] = xbar_prev.u_s;
  }

  c.beta.resize(n + 1);
  c.beta[0] = gamma0 ? xhat.beta : xbar_prev.beta;
  for (int i = 0; i < n; ++i)
    c.beta[i + 1] = token_bucket_step(c.beta[i], schedule.bits[i], design.net);

  for (int i = 0; i < n; ++i) {
    MatrixXd applied_map;
    VectorXd applied_off;
    if (schedule.bits[i]) {
      applied_map = MatrixXd::Zero(mp, nz);
      applied_map.middleCols(c.uc_index[i], mp) = MatrixXd::Identity(mp, mp);
      applied_off = VectorXd::Zero(mp);
    } else {
      applied_map = c.us_map[i];
      applied_off = c.us_off[i];
    }
    c.x_map[i + 1] = plant.A * c.x_map[i] + plant.B * applied_map;
    c.x_off[i + 1] = plant.A * c.x_off[i] + plant.B * applied_off;
    c.us_map[i + 1] = applied_map;
    c.us_off[i + 1] = applied_off;
  }

  // Objective: initial-held-input weight, stage costs, terminal cost.
  MatrixXd h = MatrixXd::Zero(nz, nz);
  VectorXd g = VectorXd::Zero(nz);
  double c0 = 0.0;
  add_quadratic(c.us_map[0], c.us_off[0], design.ocp.S, h, g, c0);
  for (int i = 0; i < n; ++i) {
    add_quadratic(c.x_map[i], c.x_off[i], plant.Q, h, g, c0);
    if (schedule.bits[i]) {
      MatrixXd sel = MatrixXd::Zero(mp, nz);
      sel.middleCols(c.uc_index[i], mp) = MatrixXd::Identity(mp, mp);
      add_quadratic(sel, VectorXd::Zero(mp), plant.R, h, g, c0);
    } else {
      add_quadratic(c.us_map[i], c.us_off[i], plant.R, h, g, c0);
    }
  }
  add_quadratic(c.x_map[n], c.x_off[n], design.terminal.P_f, h, g, c0);

  // Constraints.
  RowSet rows;
  auto add_membership = [&](const Polytope& set, const MatrixXd& f_map,
                            const VectorXd& f_off) {
    for (const auto& hs : set.halfspaces())
      rows.add(f_map.transpose() * hs.normal,
               hs.offset - hs.normal.dot(f_off));
  };

  if (gamma0) {
    // xhat - xbar(0) must lie in the control-error set, blockwise.
    for (const auto& hs : design.feedback.Omega.halfspaces())
      rows.add(-c.x_map[0].transpose() * hs.normal,
               hs.offset - hs.normal.dot(xhat.x_p - c.x_off[0]));
    if (held_us_decision) {
      for (const auto& hs : design.feedback.KOmega.halfspaces())
        rows.add(-c.us_map[0].transpose() * hs.normal,
                 hs.offset - hs.normal.dot(xhat.u_s - c.us_off[0]));
    }
  }
  for (int i = 0; i < n; ++i) {
    add_membership(design.tightened.Xbar_p, c.x_map[i], c.x_off[i]);
    add_membership(design.tightened.Ubar_p, c.us_map[i], c.us_off[i]);
    if (schedule.bits[i]) {
      MatrixXd sel = MatrixXd::Zero(mp, nz);
      sel.middleCols(c.uc_index[i], mp) = MatrixXd::Identity(mp, mp);
      add_membership(design.tightened.Ubar_p, sel, VectorXd::Zero(mp));
    }
  }
  add_membership(design.terminal.Xf_p, c.x_map[n], c.x_off[n]);
  add_membership(design.tightened.Ubar_p, c.us_map[n], c.us_off[n]);

  c.trivially_infeasible = rows.constant_violation;
  const int m = static_cast<int>(rows.normals.size());
  MatrixXd cons(m, nz);
  VectorXd offs(m);
  for (int i = 0; i < m; ++i) {
    cons.row(i) = rows.normals[i].transpose();
    offs(i) = rows.offsets[i];
  }
  c.qp = QpProblem(std::move(h), std::move(g), std::move(cons),
                   std::move(offs), c0);
  return c;
}

namespace {

// Independent re-check of a decoded solution against dynamics, constraint
// sets, the initial-condition coupling and the bucket chain.
void verify_solution(const SystemDesign& design, const CondensedOcp& c,
                     const VectorXd& z, const NcsState& xhat,
                     const NcsState& xbar_prev) {
  constexpr double kTol = 1e-8;
  const PlantModel& plant = design.plant;
  auto states = c.decode_states(z);
  auto inputs = c.decode_inputs(z);
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("ocp: solution certificate failed: " + what +
                             " (schedule " + c.schedule.to_string() + ")");
  };

  for (int i = 0; i < c.N; ++i) {
    VectorXd applied = inputs[i].gamma ? inputs[i].u_c : states[i].u_s;
    if ((states[i + 1].x_p - (plant.A * states[i].x_p + plant.B * applied))
            .lpNorm<Eigen::Infinity>() > kTol)
      fail("state recursion");
    if ((states[i + 1].u_s - applied).lpNorm<Eigen::Infinity>() > kTol)
      fail("hold recursion");
    if (states[i + 1].beta !=
        token_bucket_step(states[i].beta, inputs[i].gamma, design.net))
      fail("bucket recursion");
    if (!design.tightened.Xbar_p.contains_point(states[i].x_p, kTol))
      fail("state constraint");
    if (!design.tightened.Ubar_p.contains_point(states[i].u_s, kTol))
      fail("held input constraint");
    if (inputs[i].gamma &&
        !design.tightened.Ubar_p.contains_point(inputs[i].u_c, kTol))
      fail("update constraint");
  }
  if (!design.terminal.Xf_p.contains_point(states[c.N].x_p, kTol))
    fail("terminal region");
  if (!design.tightened.Ubar_p.contains_point(states[c.N].u_s, kTol))
    fail("terminal held input");
  if (states[c.N].beta < design.net.c - design.net.g)
    fail("terminal bucket level");

  if (c.schedule.bits[0]) {
    if (!design.feedback.Omega.contains_point(xhat.x_p - states[0].x_p, kTol))
      fail("initial-state tube");
    Polytope us_block = design.feedback.omega_us_block(plant.mp());
    if (!us_block.contains_point(xhat.u_s - states[0].u_s, kTol))
      fail("initial hold tube");
    if (states[0].beta != xhat.beta) fail("initial bucket");
  } else {
    if ((states[0].x_p - xbar_prev.x_p).lpNorm<Eigen::Infinity>() > kTol ||
        (states[0].u_s - xbar_prev.u_s).lpNorm<Eigen::Infinity>() > kTol ||
        states[0].beta != xbar_prev.beta)
      fail("anchored initial state");
  }
}

}  // namespace

OcpSolution solve_ocp(const SystemDesign& design, const NcsState& xhat,
                      const NcsState& xbar, int s, long k,
                      bool force_initial_transmission) {
  if (xhat.beta != xbar.beta)
    throw std::logic_error("solve_ocp: observer and nominal bucket diverged");
  const int n = horizon(k, design.ocp);
  auto schedules = enumerate_schedules(n, design.ocp.H, s);

  OcpSolution solution;
  struct Candidate {
    std::size_t log_index;
    CondensedOcp condensed;
    VectorXd z;
    double value;
    int transmissions;
    unsigned long long word;
  };
  std::vector<Candidate> candidates;

  for (const auto& schedule : schedules) {
    if (force_initial_transmission && !schedule.bits[0]) continue;
    ScheduleLogEntry entry;
    entry.schedule = schedule;
    if (!bucket_feasible(schedule, xbar.beta, design.net, true)) {
      entry.bucket_ok = false;
      entry.status = QpStatus::Infeasible;
      solution.per_schedule_log.push_back(std::move(entry));
      continue;
    }
    CondensedOcp condensed = build_qp(design, schedule, xhat, xbar, n);
    if (condensed.trivially_infeasible) {
      entry.status = QpStatus::Infeasible;
      solution.per_schedule_log.push_back(std::move(entry));
      continue;
    }
    QpResult result = solve_qp(condensed.qp);
    entry.status = result.status;
    entry.value = result.value;
    solution.per_schedule_log.push_back(entry);
    if (result.status == QpStatus::Optimal) {
      candidates.push_back({solution.per_schedule_log.size() - 1,
                            std::move(condensed), result.solution,
                            result.value, schedule.transmissions(),
                            schedule.word()});
    }
  }

  if (candidates.empty()) {
    std::ostringstream os;
    os << "ocp infeasible at k=" << k << " (N=" << n << ", s=" << s
       << ", beta=" << xbar.beta << ", " << schedules.size()
       << " schedules considered)";
    throw OcpInfeasible(os.str());
  }

  double best_value = std::numeric_limits<double>::infinity();
  for (const auto& cand : candidates)
    best_value = std::min(best_value, cand.value);
  const Candidate* best = nullptr;
  for (const auto& cand : candidates) {
    if (cand.value > best_value + 1e-9) continue;
    if (!best || cand.transmissions < best->transmissions ||
        (cand.transmissions == best->transmissions && cand.word < best->word))
      best = &cand;
  }

  verify_solution(design, best->condensed, best->z, xhat, xbar);
  solution.schedule = best->condensed.schedule;
  solution.xbar_traj = best->condensed.decode_states(best->z);
  solution.ubar_traj = best->condensed.decode_inputs(best->z);
  solution.value = best->value;
  return solution;
}

}  // namespace retc
