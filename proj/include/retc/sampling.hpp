#pragma once

#include <random>
#include <stdexcept>

#include "retc/polytope.hpp"

namespace retc {

// Uniform sample from a polytope by rejection from its bounding box.
// Degenerate sets are sampled on their (low-dimensional) vertex hull via
// convex mixing, which is not uniform but stays inside the set.
inline Eigen::VectorXd sample_polytope(const Polytope& p,
                                       std::mt19937_64& rng) {
  if (p.is_empty()) throw std::runtime_error("sample from empty polytope");
  const auto& verts = p.vertices();
  if (verts.size() == 1) return verts[0];
  auto [lo, hi] = bounding_box(p);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 0; attempt < 20000; ++attempt) {
    Eigen::VectorXd x(p.dim());
    for (int i = 0; i < p.dim(); ++i)
      x(i) = lo(i) + (hi(i) - lo(i)) * unit(rng);
    if (p.contains_point(x)) return x;
  }
  // Thin set: fall back to a random convex combination of vertices.
  Eigen::VectorXd weights(static_cast<int>(verts.size()));
  for (int i = 0; i < weights.size(); ++i) weights(i) = unit(rng);
  weights /= weights.sum();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(p.dim());
  for (std::size_t i = 0; i < verts.size(); ++i)
    x += weights(static_cast<int>(i)) * verts[i];
  return x;
}

}  // namespace retc
