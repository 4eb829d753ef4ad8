#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "retc/design.hpp"
#include "retc/numerics.hpp"
#include "retc/system_model.hpp"

namespace retc {

// Binary transmission schedule over one prediction horizon.
struct Schedule {
  std::vector<uint8_t> bits;

  int length() const { return static_cast<int>(bits.size()); }
  int transmissions() const;
  // Left-to-right binary value (bits[0] most significant).
  unsigned long long word() const;
  std::string to_string() const;
};

// N(k) = N_bar - (k mod M).
int horizon(long k, const OcpConfig& cfg);

// All schedules of length n whose first transmission comes within h-s-1
// steps and whose gaps stay at most h; words shorter than h-s are exempt.
// Ascending left-to-right binary order, generated with gap pruning.
std::vector<Schedule> enumerate_schedules(int n, int h, int s);

// Simulates the bucket along the schedule; true iff no step underflows and
// (when terminal is set) the final level supports the next cycle.
bool bucket_feasible(const Schedule& schedule, long beta0,
                     const NetworkSpec& net, bool terminal);

// One schedule's continuous subproblem, condensed to an inequality-only QP
// over [initial state block; transmitted updates], plus the affine decoder.
struct CondensedOcp {
  Schedule schedule;
  int N = 0;
  bool trivially_infeasible = false;  // a constant constraint row failed
  QpProblem qp;

  // Affine maps from the decision vector to the trajectories.
  std::vector<Eigen::MatrixXd> x_map;  // np x nz, per step 0..N
  std::vector<Eigen::VectorXd> x_off;
  std::vector<Eigen::MatrixXd> us_map;  // mp x nz, per step 0..N
  std::vector<Eigen::VectorXd> us_off;
  std::vector<int> uc_index;  // decision offset of u_c(i), -1 if none
  std::vector<long> beta;     // schedule-determined bucket levels 0..N

  std::vector<NcsState> decode_states(const Eigen::VectorXd& z) const;
  std::vector<NcsInput> decode_inputs(const Eigen::VectorXd& z) const;
};

CondensedOcp build_qp(const SystemDesign& design, const Schedule& schedule,
                      const NcsState& xhat, const NcsState& xbar_prev, int n);

struct ScheduleLogEntry {
  Schedule schedule;
  QpStatus status = QpStatus::Infeasible;
  bool bucket_ok = true;
  double value = 0.0;
};

struct OcpSolution {
  Schedule schedule;
  std::vector<NcsState> xbar_traj;  // length N+1
  std::vector<NcsInput> ubar_traj;  // length N
  double value = 0.0;
  std::vector<ScheduleLogEntry> per_schedule_log;
};

struct OcpInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Enumerate schedules, filter by bucket feasibility, solve one QP each and
// return the best solution. Ties within 1e-9 go to fewer transmissions,
// then to the smaller schedule word. Throws OcpInfeasible when no schedule
// admits a feasible subproblem.
OcpSolution solve_ocp(const SystemDesign& design, const NcsState& xhat,
                      const NcsState& xbar, int s, long k,
                      bool force_initial_transmission = false);

}  // namespace retc
