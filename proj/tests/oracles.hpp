#pragma once

// Test-only reference implementations, kept independent of the library's
// solution paths on purpose.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace retc::oracles {

// Optimal value of min 1/2 x'Hx + g'x + c0 s.t. Cx <= d for positive
// definite H, via projected gradient ascent on the dual (the projection
// onto the dual cone is a plain clamp). Assumes a feasible problem.
inline double qp_value_dual_pg(const Eigen::MatrixXd& h,
                               const Eigen::VectorXd& g,
                               const Eigen::MatrixXd& c,
                               const Eigen::VectorXd& d, double c0,
                               int iterations = 200000) {
  Eigen::MatrixXd hinv = h.inverse();
  if (c.rows() == 0) {
    Eigen::VectorXd x = -hinv * g;
    return 0.5 * x.dot(h * x) + g.dot(x) + c0;
  }
  Eigen::MatrixXd chc = c * hinv * c.transpose();
  double lip = chc.norm() + 1e-12;
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(c.rows());
  for (int k = 0; k < iterations; ++k) {
    Eigen::VectorXd grad = -(c * (hinv * (g + c.transpose() * lambda))) - d;
    Eigen::VectorXd next = (lambda + grad / lip).cwiseMax(0.0);
    double step = (next - lambda).lpNorm<Eigen::Infinity>();
    lambda = next;
    if (step < 1e-14) break;
  }
  Eigen::VectorXd v = g + c.transpose() * lambda;
  return -0.5 * v.dot(hinv * v) - lambda.dot(d) + c0;
}

// All binary words of length n in ascending left-to-right binary order.
inline std::vector<std::vector<uint8_t>> all_words(int n) {
  std::vector<std::vector<uint8_t>> out;
  const int total = 1 << n;
  for (int w = 0; w < total; ++w) {
    std::vector<uint8_t> bits(n);
    for (int i = 0; i < n; ++i) bits[i] = (w >> (n - 1 - i)) & 1;
    out.push_back(bits);
  }
  return out;
}

// Literal transcription of the schedule-set membership rule: the first
// transmission arrives within H-s-1 steps, consecutive transmissions are at
// most H apart, the tail after the last transmission is shorter than H; or
// the word is shorter than H-s and exempt entirely.
inline bool schedule_member(const std::vector<uint8_t>& bits, int H, int s) {
  const int n = static_cast<int>(bits.size());
  if (n <= H - s - 1) return true;
  std::vector<int> tau;
  for (int i = 0; i < n; ++i)
    if (bits[i]) tau.push_back(i);
  if (tau.empty()) return false;
  if (tau.front() > H - s - 1) return false;
  for (std::size_t j = 0; j + 1 < tau.size(); ++j)
    if (tau[j + 1] - tau[j] > H) return false;
  return n - tau.back() <= H - 1;
}

}  // namespace retc::oracles
