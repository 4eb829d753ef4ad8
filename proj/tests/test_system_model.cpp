#include "retc/system_model.hpp"

#include <random>

#include "doctest.h"
#include "test_support.hpp"

using namespace retc;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {
VectorXd vec1(double v) { return VectorXd::Constant(1, v); }
}  // namespace

TEST_CASE("plant validation") {
  auto plant = testing::benchmark_plant();
  CHECK_NOTHROW(plant.validate());

  auto bad = plant;
  bad.B = MatrixXd::Zero(2, 1);  // double integrator without input authority
  CHECK_THROWS(bad.validate());

  auto undetectable = plant;
  undetectable.C = MatrixXd{{0.0, 0.0}};
  CHECK_THROWS(undetectable.validate());
}

TEST_CASE("network validation") {
  auto net = testing::benchmark_network();
  CHECK_NOTHROW(net.validate());
  CHECK(net.base_period() == 3);

  auto bad = net;
  bad.beta0 = 1;  // below c - g
  CHECK_THROWS(bad.validate());
  bad = net;
  bad.c = 0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("token bucket step") {
  auto net = testing::benchmark_network();
  CHECK(token_bucket_step(10, 1, net) == 8);
  CHECK(token_bucket_step(10, 0, net) == 10);  // saturates at b
  CHECK(token_bucket_step(2, 1, net) == 0);    // exact depletion
  CHECK_THROWS(token_bucket_step(1, 1, net));
}

TEST_CASE("ncs step") {
  auto plant = testing::benchmark_plant();
  auto net = testing::benchmark_network();

  NcsState x{Vector2d(6.0, -2.0), vec1(0.0), 10};
  NcsInput hold{vec1(0.0), 0, vec1(0.0)};
  auto next = ncs_step(x, hold, Vector2d::Zero(), plant, net);
  CHECK(next.x_p(0) == doctest::Approx(5.8));
  CHECK(next.x_p(1) == doctest::Approx(-2.0));
  CHECK(next.u_s(0) == doctest::Approx(0.0));
  CHECK(next.beta == 10);

  NcsInput update{vec1(3.0), 1, vec1(0.0)};
  next = ncs_step(x, update, Vector2d::Zero(), plant, net);
  CHECK(next.u_s(0) == doctest::Approx(3.0));
  CHECK(next.beta == 8);

  // Strict mode rejects a disturbance outside W; permissive flags it.
  CHECK_THROWS(ncs_step(x, hold, Vector2d(1.0, 0.0), plant, net));
  bool violated = false;
  ncs_step(x, hold, Vector2d(1.0, 0.0), plant, net, CheckMode::Permissive,
           &violated);
  CHECK(violated);
}

TEST_CASE("observer step") {
  auto plant = testing::benchmark_plant();
  MatrixXd zero_gain = MatrixXd::Zero(2, 1);

  Vector2d xhat(1.0, 0.5);
  VectorXd u = vec1(2.0);
  VectorXd y = vec1(7.0);
  Vector2d open_loop = plant.A * xhat + plant.B * u;
  CHECK((observer_step(xhat, u, y, zero_gain, plant) - open_loop).norm() ==
        doctest::Approx(0.0));

  // Zero innovation behaves like the open-loop prediction.
  MatrixXd gain(2, 1);
  gain << 0.5, 0.1;
  VectorXd y_match = plant.C * xhat;
  CHECK((observer_step(xhat, u, y_match, gain, plant) - open_loop).norm() ==
        doctest::Approx(0.0));
}

TEST_CASE("plant output") {
  auto plant = testing::benchmark_plant();
  CHECK(plant_output(Vector2d(6.0, -2.0), vec1(0.001), plant)(0) ==
        doctest::Approx(6.001));
  CHECK(plant_output(Vector2d::Zero(), vec1(0.0), plant)(0) ==
        doctest::Approx(0.0));
  CHECK_THROWS(plant_output(Vector2d::Zero(), vec1(0.5), plant));
}

TEST_CASE("property: bucket level stays within bounds on accepted sequences") {
  auto net = testing::benchmark_network();
  std::mt19937 rng(41);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 20; ++trial) {
    long beta = net.beta0;
    long transmissions = 0;
    const int horizon = 200;
    for (int k = 0; k < horizon; ++k) {
      int want = coin(rng) ? 1 : 0;
      if (want == 1 && beta + net.g - net.c < 0) want = 0;
      beta = token_bucket_step(beta, want, net);
      transmissions += want;
      REQUIRE(beta >= 0);
      REQUIRE(beta <= net.b);
    }
    // Average-rate bound implied by the bucket.
    CHECK(transmissions <= (net.beta0 + net.g * horizon) / net.c);
  }
}

TEST_CASE("property: hold sequences follow the matrix-power closed form") {
  auto plant = testing::benchmark_plant();
  auto net = testing::benchmark_network();
  std::mt19937 rng(43);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    NcsState x{Vector2d(coord(rng), coord(rng)), vec1(coord(rng)), net.beta0};
    NcsInput hold{vec1(0.0), 0, vec1(0.0)};
    NcsState cur = x;
    MatrixXd a_pow = MatrixXd::Identity(2, 2);
    for (int k = 1; k <= 12; ++k) {
      cur = ncs_step(cur, hold, Vector2d::Zero(), plant, net);
      a_pow = plant.A * a_pow;
      MatrixXd b_acc = MatrixXd::Zero(2, 1);
      MatrixXd p = MatrixXd::Identity(2, 2);
      for (int j = 0; j < k; ++j) {
        b_acc += p * plant.B;
        p = plant.A * p;
      }
      Vector2d expect = a_pow * x.x_p + b_acc * x.u_s;
      CHECK((cur.x_p - expect).lpNorm<Eigen::Infinity>() <= 1e-12);
      CHECK(cur.u_s(0) == x.u_s(0));
    }
  }
}
