#include "retc/invariant_sets.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "retc/numerics.hpp"
#include "retc/sampling.hpp"
#include "test_support.hpp"

using namespace retc;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

VectorXd vec1(double v) { return VectorXd::Constant(1, v); }

// Scalar plant wrapper for the closed-form cases.
PlantModel scalar_plant(double a, double b, double c, double w_bound,
                        double v_bound) {
  PlantModel plant;
  plant.A = MatrixXd::Constant(1, 1, a);
  plant.B = MatrixXd::Constant(1, 1, b);
  plant.C = MatrixXd::Constant(1, 1, c);
  plant.Q = MatrixXd::Identity(1, 1);
  plant.R = MatrixXd::Identity(1, 1);
  plant.X = Polytope::from_box(vec1(-100), vec1(100));
  plant.U = Polytope::from_box(vec1(-100), vec1(100));
  plant.W = w_bound > 0 ? Polytope::from_box(vec1(-w_bound), vec1(w_bound))
                        : Polytope::singleton(vec1(0.0));
  plant.V = v_bound > 0 ? Polytope::from_box(vec1(-v_bound), vec1(v_bound))
                        : Polytope::singleton(vec1(0.0));
  return plant;
}

}  // namespace

TEST_CASE("b_power") {
  auto plant = testing::benchmark_plant();
  CHECK((b_power(plant.A, plant.B, 1) - plant.B).norm() ==
        doctest::Approx(0.0));

  MatrixXd b(2, 1);
  b << 1, 2;
  CHECK((b_power(MatrixXd::Identity(2, 2), b, 3) - 3 * b).norm() ==
        doctest::Approx(0.0));

  MatrixXd two = b_power(plant.A, plant.B, 2);
  CHECK(two(0, 0) == doctest::Approx(0.02));
  CHECK(two(1, 0) == doctest::Approx(0.2));

  CHECK_THROWS(b_power(plant.A, plant.B, 0));
}

TEST_CASE("observer synthesis: disturbance-free plant collapses to a point") {
  auto plant = scalar_plant(0.9, 1.0, 1.0, 0.0, 0.0);
  auto design = synthesize_observer(plant);
  CHECK(design.Psi.vertices().size() == 1);
  CHECK(design.Psi.vertices()[0].norm() == doctest::Approx(0.0));
  CHECK(design.Delta.vertices()[0].norm() == doctest::Approx(0.0));
}

TEST_CASE("observer synthesis: scalar geometric series") {
  // a - l c = 0.5 with disturbance [-1, 1]: the invariant interval is
  // exactly [-2, 2] and the invariance condition is tight.
  auto plant = scalar_plant(1.0, 1.0, 1.0, 1.0, 0.0);
  auto design = make_observer_design(plant, MatrixXd::Constant(1, 1, 0.5));
  CHECK(design.Psi.support(vec1(1)) == doctest::Approx(2.0));
  CHECK(design.Psi.support(vec1(-1)) == doctest::Approx(2.0));
  CHECK(design.rpi_margin == doctest::Approx(0.0).epsilon(1e-9));

  // A deliberately too-small invariant candidate reports a negative margin.
  ObserverDesign broken = design;
  broken.Psi = Polytope::singleton(vec1(0.0));
  CHECK(verify_estimation_rpi(broken, plant) < 0.0);
}

TEST_CASE("observer synthesis: double integrator") {
  auto plant = testing::benchmark_plant();
  auto design = synthesize_observer(plant);
  CHECK(design.rpi_margin >= -1e-9);
  CHECK(spectral_radius(plant.A - design.L * plant.C) < 1.0);
  double area = volume(design.Psi);
  CHECK(area > 1e-4);
  CHECK(area < 1e-1);
}

TEST_CASE("hold-gain certificate blocks") {
  auto plant = scalar_plant(0.5, 0.0, 1.0, 0.1, 0.0);
  MatrixXd one = MatrixXd::Identity(1, 1);
  MatrixXd zero = MatrixXd::Zero(1, 1);
  CHECK(verify_zoh_lmi(one, zero, 0.5, plant, 3));
  CHECK(!verify_zoh_lmi(one, zero, 1e-6, plant, 1));

  // Deadbeat closed loop: off-diagonal block vanishes.
  auto dead = scalar_plant(1.0, 1.0, 1.0, 0.1, 0.0);
  CHECK(verify_zoh_lmi(one, -one, 0.25, dead, 1));

  MatrixXd asym(1, 1);
  CHECK_THROWS(verify_zoh_lmi(MatrixXd::Constant(1, 1, 1.0),
                              MatrixXd::Constant(1, 1, 0.0), 1.5, plant, 1));
}

TEST_CASE("feedback gain synthesis") {
  auto plant = scalar_plant(1.0, 1.0, 1.0, 0.1, 0.0);
  MatrixXd k = synthesize_feedback_gain(plant, ActuatorKind::PredictionBased, 3);
  CHECK(k(0, 0) == doctest::Approx(-(std::sqrt(5.0) - 1.0) / 2.0));

  auto bench = testing::benchmark_plant();
  for (auto kind : {ActuatorKind::Zoh, ActuatorKind::PredictionBased,
                    ActuatorKind::LocalMeasurement}) {
    MatrixXd kp = synthesize_feedback_gain(bench, kind, 5);
    CHECK(spectral_radius(bench.A + bench.B * kp) < 1.0);
  }
}

TEST_CASE("rci construction: scalar closed forms") {
  // A + BK = 0.5, H = 1, Delta = [-1, 1]: lambda = 0.5, delta = 1, so the
  // invariant interval is [-2, 2] for every actuator tier.
  auto plant = scalar_plant(1.0, 1.0, 1.0, 0.1, 0.0);
  MatrixXd k = MatrixXd::Constant(1, 1, -0.5);
  ObserverDesign observer;
  observer.L = MatrixXd::Constant(1, 1, 0.5);
  observer.Psi = Polytope::from_box(vec1(-0.5), vec1(0.5));
  observer.Delta = Polytope::from_box(vec1(-1.0), vec1(1.0));

  for (auto kind : {ActuatorKind::Zoh, ActuatorKind::PredictionBased,
                    ActuatorKind::LocalMeasurement}) {
    auto design = compute_rci(plant, kind, k, observer, 1);
    CHECK(design.Omega.support(vec1(1)) == doctest::Approx(2.0));
    CHECK(design.Omega.support(vec1(-1)) == doctest::Approx(2.0));
    CHECK(design.rci_margin >= -1e-9);
  }

  // No disturbance: the invariant set collapses to the origin.
  observer.Delta = Polytope::singleton(vec1(0.0));
  auto tight = compute_rci(plant, ActuatorKind::Zoh, k, observer, 3);
  CHECK(tight.Omega.support(vec1(1)) == doctest::Approx(0.0));
}

TEST_CASE("rci construction: double integrator, H = 3 ordering") {
  auto plant = testing::benchmark_plant();
  auto observer = synthesize_observer(plant);
  double areas[3];
  int idx = 0;
  for (auto kind : {ActuatorKind::LocalMeasurement,
                    ActuatorKind::PredictionBased, ActuatorKind::Zoh}) {
    MatrixXd k = synthesize_feedback_gain(plant, kind, 3);
    auto design = compute_rci(plant, kind, k, observer, 3);
    CHECK(design.rci_margin >= -1e-9);
    areas[idx++] = volume(design.Omega);
  }
  CHECK(areas[0] < areas[1]);
  CHECK(areas[1] < areas[2]);
}

TEST_CASE("verify_rci: H = 1 hold and prediction conditions coincide") {
  auto plant = testing::benchmark_plant();
  auto observer = synthesize_observer(plant);
  MatrixXd k = synthesize_feedback_gain(plant, ActuatorKind::PredictionBased, 1);

  auto zoh = compute_rci(plant, ActuatorKind::Zoh, k, observer, 1);
  FeedbackDesign pred = zoh;
  pred.kind = ActuatorKind::PredictionBased;
  CHECK(verify_rci(zoh, plant, observer) ==
        doctest::Approx(verify_rci(pred, plant, observer)).epsilon(1e-12));

  // Shrinking the set breaks invariance.
  FeedbackDesign small = zoh;
  small.Omega = scale(zoh.Omega, 0.5);
  CHECK(verify_rci(small, plant, observer) < 0.0);
}

TEST_CASE("error feedback maps") {
  MatrixXd k(1, 2);
  k << -1.0, -2.0;
  Vector2d same(1.0, 2.0);
  VectorXd nu = vec1(3.0);

  for (auto kind : {ActuatorKind::Zoh, ActuatorKind::PredictionBased,
                    ActuatorKind::LocalMeasurement}) {
    auto [uc, ue] = error_feedback(kind, 1, nu, same, same, same, k);
    CHECK(uc(0) == doctest::Approx(3.0));
    CHECK(ue(0) == doctest::Approx(0.0));
  }

  auto [uc0, ue0] = error_feedback(ActuatorKind::Zoh, 0, nu, same, same, same, k);
  CHECK(uc0(0) == 0.0);
  CHECK(ue0(0) == 0.0);

  Vector2d xtilde(2.0, 2.5);
  auto [uc1, ue1] = error_feedback(ActuatorKind::PredictionBased, 0, nu, same,
                                   xtilde, same, k);
  CHECK(uc1(0) == 0.0);
  CHECK(ue1(0) == doctest::Approx((k * (xtilde - same))(0)));
}

TEST_CASE("invariant-set structure across H") {
  auto plant = testing::benchmark_plant();
  auto observer = synthesize_observer(plant);

  // Locally measuring actuator: one set for every H.
  MatrixXd k_local =
      synthesize_feedback_gain(plant, ActuatorKind::LocalMeasurement, 3);
  auto base = compute_rci(plant, ActuatorKind::LocalMeasurement, k_local,
                          observer, 3);
  for (int h : {4, 5, 6}) {
    auto other = compute_rci(plant, ActuatorKind::LocalMeasurement, k_local,
                             observer, h);
    double m1 = 0, m2 = 0;
    CHECK(is_subset(base.Omega, other.Omega, &m1));
    CHECK(is_subset(other.Omega, base.Omega, &m2));
    CHECK(m1 >= -1e-9);
    CHECK(m2 >= -1e-9);
  }
}
