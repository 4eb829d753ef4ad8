#include "retc/terminal_ingredients.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "retc/invariant_sets.hpp"
#include "retc/numerics.hpp"
#include "retc/sampling.hpp"
#include "test_support.hpp"

using namespace retc;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

VectorXd vec1(double v) { return VectorXd::Constant(1, v); }

TightenedSets untightened(const PlantModel& plant) {
  TightenedSets t;
  t.Xhat_p = plant.X;
  t.Xbar_p = plant.X;
  t.Ubar_p = plant.U;
  return t;
}

}  // namespace

TEST_CASE("lifted system") {
  auto plant = testing::benchmark_plant();
  auto [a1, b1] = lifted_system(plant, 1);
  CHECK((a1 - plant.A).norm() == doctest::Approx(0.0));
  CHECK((b1 - plant.B).norm() == doctest::Approx(0.0));

  PlantModel integrator = plant;
  integrator.A = MatrixXd::Identity(2, 2);
  auto [ai, bi] = lifted_system(integrator, 4);
  CHECK((ai - MatrixXd::Identity(2, 2)).norm() == doctest::Approx(0.0));
  CHECK((bi - 4 * plant.B).norm() == doctest::Approx(0.0));

  bool controllable = false;
  auto [a3, b3] = lifted_system(plant, 3, &controllable);
  CHECK(a3(0, 1) == doctest::Approx(0.3));
  CHECK(a3(1, 1) == doctest::Approx(1.0));
  CHECK(controllable);
}

TEST_CASE("terminal synthesis: scalar closed form") {
  PlantModel plant;
  plant.A = MatrixXd::Constant(1, 1, 1.0);
  plant.B = MatrixXd::Constant(1, 1, 1.0);
  plant.C = MatrixXd::Constant(1, 1, 1.0);
  plant.Q = MatrixXd::Identity(1, 1);
  plant.R = MatrixXd::Identity(1, 1);
  plant.X = Polytope::from_box(vec1(-10), vec1(10));
  plant.U = Polytope::from_box(vec1(-10), vec1(10));
  plant.W = Polytope::singleton(vec1(0.0));
  plant.V = Polytope::singleton(vec1(0.0));

  auto design = synthesize_terminal(plant, 1, untightened(plant));
  double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  CHECK(design.K_f(0, 0) == doctest::Approx(-(golden - 1.0)));
  CHECK(design.P_f(0, 0) == doctest::Approx(golden));
  CHECK(design.invariance_margin >= -1e-8);
  CHECK(design.decrease_margin >= -1e-8);
  CHECK(!design.Xf_p.is_empty());
}

TEST_CASE("terminal synthesis: benchmark cycle") {
  auto plant = testing::benchmark_plant();
  auto design = synthesize_terminal(plant, 3, untightened(plant));
  CHECK(design.Xf_p.contains_origin());
  CHECK(design.invariance_margin >= -1e-8);
  CHECK(std::abs(design.decrease_margin) <= 1e-6);  // equality construction

  SUBCASE("broken designs report negative margins") {
    TerminalDesign weak_cost = design;
    weak_cost.P_f = 0.1 * design.P_f;
    auto [m1a, m2a] = verify_terminal(weak_cost, plant, untightened(plant));
    CHECK(m2a < 0.0);
    CHECK(m1a >= -1e-8);

    TerminalDesign big_region = design;
    big_region.Xf_p = scale(design.Xf_p, 10.0);
    auto [m1b, m2b] = verify_terminal(big_region, plant, untightened(plant));
    CHECK(m1b < 0.0);
  }
}

TEST_CASE("terminal synthesis: tightened benchmark chain") {
  auto plant = testing::benchmark_plant();
  auto observer = synthesize_observer(plant);
  MatrixXd k = synthesize_feedback_gain(plant, ActuatorKind::PredictionBased, 5);
  auto feedback = compute_rci(plant, ActuatorKind::PredictionBased, k,
                              observer, 5);
  auto tightened = tighten(plant, observer.Psi, feedback.Omega,
                           feedback.KOmega);
  auto design = synthesize_terminal(plant, 3, tightened);
  CHECK(design.Xf_p.contains_origin());
  CHECK(design.invariance_margin >= -1e-8);

  SUBCASE("sampled M-step invariance") {
    std::mt19937_64 rng(101);
    auto [a_m, b_m] = lifted_system(plant, 3);
    MatrixXd closed = a_m + b_m * design.K_f;
    MatrixXd b2 = b_power(plant.A, plant.B, 2);
    for (int trial = 0; trial < 500; ++trial) {
      VectorXd x = sample_polytope(design.Xf_p, rng);
      VectorXd u = design.K_f * x;
      CHECK(tightened.Ubar_p.contains_point(u, 1e-8));
      VectorXd x1 = plant.A * x + plant.B * u;
      VectorXd x2 = plant.A * x1 + plant.B * u;
      CHECK(tightened.Xbar_p.contains_point(x1, 1e-8));
      CHECK(tightened.Xbar_p.contains_point(x2, 1e-8));
      CHECK((x2 - (plant.A * plant.A * x + b2 * u)).lpNorm<Eigen::Infinity>() <=
            1e-9);
      VectorXd xm = closed * x;
      CHECK(design.Xf_p.contains_point(xm, 1e-8));
    }
  }

  SUBCASE("sampled cycle cost decrease") {
    std::mt19937_64 rng(103);
    auto [a_m, b_m] = lifted_system(plant, 3);
    MatrixXd closed = a_m + b_m * design.K_f;
    for (int trial = 0; trial < 500; ++trial) {
      VectorXd x = sample_polytope(design.Xf_p, rng);
      VectorXd u = design.K_f * x;
      double stage = 0.0;
      VectorXd xi = x;
      for (int i = 0; i < 3; ++i) {
        stage += xi.dot(plant.Q * xi) + u.dot(plant.R * u);
        xi = plant.A * xi + plant.B * u;
      }
      double vf_next = xi.dot(design.P_f * xi);
      double vf = x.dot(design.P_f * x);
      CHECK(vf_next - vf <= -stage + 1e-8);
    }
  }
}
