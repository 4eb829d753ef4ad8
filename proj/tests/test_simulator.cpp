#include "retc/simulator.hpp"

#include "doctest.h"
#include "test_support.hpp"

using namespace retc;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

VectorXd vec1(double v) { return VectorXd::Constant(1, v); }

SystemDesign benchmark_design(ActuatorKind kind) {
  return synthesize_design(testing::benchmark_plant(),
                           testing::benchmark_network(), kind, /*h=*/5,
                           /*n_bar=*/6, MatrixXd::Constant(1, 1, 1e-6),
                           /*noise_weight=*/1.0, /*gain_horizon=*/6);
}

SimConfig benchmark_sim(DisturbanceMode mode, int steps = 51) {
  SimConfig cfg;
  cfg.steps = steps;
  cfg.mode = mode;
  cfg.x_p0 = Vector2d(6.0, -2.0);
  cfg.u_s0 = vec1(0.0);
  cfg.xhat0 = Vector2d(6.0, -2.0);
  return cfg;
}

}  // namespace

TEST_CASE("uncertainty sampling") {
  auto plant = testing::benchmark_plant();
  std::mt19937_64 rng(7);

  auto [wz, vz] = sample_uncertainty(DisturbanceMode::Zero, 0, plant.W,
                                     plant.V, rng);
  CHECK(wz.norm() == 0.0);
  CHECK(vz.norm() == 0.0);

  auto [wf, vf] = sample_uncertainty(DisturbanceMode::ExtremalFixed, 0,
                                     plant.W, plant.V, rng);
  CHECK(wf(0) == doctest::Approx(0.002));
  CHECK(wf(1) == doctest::Approx(0.002));
  CHECK(vf(0) == doctest::Approx(0.001));

  auto [ws0, _a] = sample_uncertainty(DisturbanceMode::ExtremalSwitching, 0,
                                      plant.W, plant.V, rng);
  auto [ws1, _b] = sample_uncertainty(DisturbanceMode::ExtremalSwitching, 1,
                                      plant.W, plant.V, rng);
  CHECK(ws0(0) == doctest::Approx(0.002));
  CHECK(ws1(0) == doctest::Approx(-0.002));

  std::mt19937_64 rng_a(42), rng_b(42);
  for (int k = 0; k < 5; ++k) {
    auto [w1, v1] = sample_uncertainty(DisturbanceMode::UniformRandom, k,
                                       plant.W, plant.V, rng_a);
    auto [w2, v2] = sample_uncertainty(DisturbanceMode::UniformRandom, k,
                                       plant.W, plant.V, rng_b);
    CHECK((w1 - w2).norm() == 0.0);
    CHECK((v1 - v2).norm() == 0.0);
    CHECK(plant.W.contains_point(w1));
    CHECK(plant.V.contains_point(v1));
  }
}

TEST_CASE("closed loop: equilibrium stays at the origin") {
  auto design = benchmark_design(ActuatorKind::Zoh);
  SimConfig cfg = benchmark_sim(DisturbanceMode::Zero, 12);
  cfg.x_p0 = Vector2d::Zero();
  cfg.xhat0 = Vector2d::Zero();
  auto trace = run_closed_loop(design, cfg);
  REQUIRE(trace.steps.size() == 12);
  for (const auto& rec : trace.steps) {
    CHECK(rec.feasible);
    CHECK(rec.x.x_p.lpNorm<Eigen::Infinity>() <= 1e-9);
    CHECK(rec.ocp_value <= 1e-9);
  }
  auto report = check_trace(trace, design);
  CHECK(report.all_pass());
}

TEST_CASE("closed loop: benchmark run per actuator kind") {
  for (auto kind : {ActuatorKind::Zoh, ActuatorKind::PredictionBased,
                    ActuatorKind::LocalMeasurement}) {
    CAPTURE(to_string(kind));
    auto design = benchmark_design(kind);
    auto trace = run_closed_loop(design, benchmark_sim(
                                             DisturbanceMode::ExtremalSwitching));
    REQUIRE(trace.steps.size() == 51);
    auto report = check_trace(trace, design);
    for (const auto& check : report.checks) {
      CAPTURE(check.name);
      CAPTURE(check.detail);
      CHECK(check.pass);
    }
    CHECK(trace.steps[0].u.gamma == 1);
    CHECK(report.max_gap <= 5);
    CHECK(report.transmissions >= 11);  // at least the forced cadence
    CHECK(report.transmissions <= 20);  // bucket hard cap

    // Counter bookkeeping: s(k) counts steps since the last transmission.
    int expect_s = 0;
    for (const auto& rec : trace.steps) {
      CHECK(rec.s == expect_s);
      expect_s = rec.u.gamma ? 0 : rec.s + 1;
    }

    // Controller-internal copies track the actuator exactly.
    for (const auto& rec : trace.steps) {
      CHECK(rec.xhat.beta == rec.x.beta);
      CHECK((rec.xhat.u_s - rec.x.u_s).lpNorm<Eigen::Infinity>() == 0.0);
    }
  }
}

TEST_CASE("closed loop: deterministic traces") {
  auto design = benchmark_design(ActuatorKind::PredictionBased);
  SimConfig cfg = benchmark_sim(DisturbanceMode::UniformRandom);
  cfg.seed = 99;
  auto a = trace_csv(run_closed_loop(design, cfg), design);
  auto b = trace_csv(run_closed_loop(design, cfg), design);
  CHECK(a == b);
  CHECK(a.find("nan") == std::string::npos);
}

TEST_CASE("closed loop: fault injection breaks the tube") {
  auto design = benchmark_design(ActuatorKind::Zoh);
  SimConfig cfg = benchmark_sim(DisturbanceMode::ExtremalFixed);
  cfg.fault_scale = 400.0;  // way outside the modeled disturbance
  auto trace = run_closed_loop(design, cfg);
  auto report = check_trace(trace, design);
  CHECK(!report.all_pass());
  bool tube_failed = false;
  for (const auto& check : report.checks)
    if (check.name == "real-state tube" && !check.pass) tube_failed = true;
  for (const auto& check : report.checks)
    if (check.name == "real constraints" && !check.pass) tube_failed = true;
  CHECK(tube_failed);
}

TEST_CASE("trace csv layout") {
  auto design = benchmark_design(ActuatorKind::Zoh);
  SimConfig cfg = benchmark_sim(DisturbanceMode::Zero, 3);
  auto trace = run_closed_loop(design, cfg);
  std::string csv = trace_csv(trace, design);
  CHECK(csv.rfind("k,x_p0,x_p1,u_s0,beta,xhat_p0,xhat_p1,xbar_p0,xbar_p1,"
                  "xtilde_p0,xtilde_p1,u_c0,gamma,u_e0,s,N,ocp_value,feasible",
                  0) == 0);
  int lines = 0;
  for (char ch : csv)
    if (ch == '\n') ++lines;
  CHECK(lines == 1 + 3 + 1);  // header, three steps, final state row
}
