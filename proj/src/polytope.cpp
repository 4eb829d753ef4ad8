#include "retc/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace retc {

namespace {

double g_tolerance = 1e-9;

using Eigen::MatrixXd;
using Eigen::VectorXd;

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("polytope: " + msg);
}

double coordinate_scale(const std::vector<VectorXd>& pts) {
  double s = 1.0;
  for (const auto& p : pts) s = std::max(s, p.lpNorm<Eigen::Infinity>());
  return s;
}

std::vector<VectorXd> dedupe_points(const std::vector<VectorXd>& pts,
                                    double tol) {
  std::vector<VectorXd> out;
  for (const auto& p : pts) {
    bool dup = false;
    for (const auto& q : out) {
      if ((p - q).lpNorm<Eigen::Infinity>() <= tol) {
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(p);
  }
  return out;
}

// Orthonormal basis of the affine hull of a point cloud.
struct AffineFrame {
  VectorXd center;
  MatrixXd basis;       // dim x rank, columns orthonormal
  MatrixXd complement;  // dim x (dim - rank)
  int rank = 0;
};

AffineFrame affine_frame(const std::vector<VectorXd>& pts, int dim) {
  AffineFrame f;
  f.center = VectorXd::Zero(dim);
  for (const auto& p : pts) f.center += p;
  f.center /= static_cast<double>(pts.size());

  MatrixXd centered(static_cast<int>(pts.size()), dim);
  for (int i = 0; i < centered.rows(); ++i)
    centered.row(i) = (pts[i] - f.center).transpose();

  Eigen::JacobiSVD<MatrixXd> svd(centered, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double thresh = std::max(1e-12, g_tolerance * std::max(1.0, sv.size() ? sv(0) : 0.0));
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > thresh) ++rank;
  f.rank = rank;
  f.basis = svd.matrixV().leftCols(rank);
  f.complement = svd.matrixV().rightCols(dim - rank);
  return f;
}

// Andrew's monotone chain; input points are deduped. Returns hull in
// counter-clockwise order.
std::vector<VectorXd> convex_hull_ccw(std::vector<VectorXd> pts) {
  std::sort(pts.begin(), pts.end(), [](const VectorXd& a, const VectorXd& b) {
    return a(0) < b(0) || (a(0) == b(0) && a(1) < b(1));
  });
  auto cross = [](const VectorXd& o, const VectorXd& a, const VectorXd& b) {
    return (a(0) - o(0)) * (b(1) - o(1)) - (a(1) - o(1)) * (b(0) - o(0));
  };
  auto keep = [&](const VectorXd& o, const VectorXd& a, const VectorXd& b) {
    // Non-left turns (within a relative collinearity band) are dropped.
    double c = cross(o, a, b);
    double s = (a - o).norm() * (b - o).norm();
    return c > 1e-12 * s;
  };
  const int n = static_cast<int>(pts.size());
  std::vector<VectorXd> hull;
  for (int i = 0; i < n; ++i) {
    while (hull.size() >= 2 &&
           !keep(hull[hull.size() - 2], hull[hull.size() - 1], pts[i]))
      hull.pop_back();
    hull.push_back(pts[i]);
  }
  const std::size_t lower_size = hull.size() + 1;
  for (int i = n - 2; i >= 0; --i) {
    while (hull.size() >= lower_size &&
           !keep(hull[hull.size() - 2], hull[hull.size() - 1], pts[i]))
      hull.pop_back();
    hull.push_back(pts[i]);
  }
  hull.pop_back();
  return hull;
}

std::vector<Halfspace> dedupe_facets(std::vector<Halfspace> facets) {
  std::vector<Halfspace> out;
  for (auto& h : facets) {
    bool dup = false;
    for (auto& g : out) {
      if ((h.normal - g.normal).lpNorm<Eigen::Infinity>() <= g_tolerance) {
        g.offset = std::min(g.offset, h.offset);
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(std::move(h));
  }
  return out;
}

// Full-dimensional facet derivation. `pts` must be deduped and span dim.
std::vector<Halfspace> facets_full_dim(const std::vector<VectorXd>& pts,
                                       int dim,
                                       std::vector<VectorXd>* hull_out) {
  std::vector<Halfspace> facets;
  if (dim == 1) {
    double lo = pts[0](0), hi = pts[0](0);
    for (const auto& p : pts) {
      lo = std::min(lo, p(0));
      hi = std::max(hi, p(0));
    }
    facets.push_back({VectorXd::Constant(1, 1.0), hi});
    facets.push_back({VectorXd::Constant(1, -1.0), -lo});
    hull_out->clear();
    hull_out->push_back(VectorXd::Constant(1, lo));
    hull_out->push_back(VectorXd::Constant(1, hi));
    return facets;
  }
  if (dim == 2) {
    auto hull = convex_hull_ccw(pts);
    const int n = static_cast<int>(hull.size());
    for (int i = 0; i < n; ++i) {
      const VectorXd& v = hull[i];
      const VectorXd& w = hull[(i + 1) % n];
      Eigen::Vector2d t = (w - v).head<2>();
      double len = t.norm();
      if (len <= 1e-15) continue;
      VectorXd normal(2);
      normal << t(1) / len, -t(0) / len;
      facets.push_back({normal, normal.dot(v)});
    }
    *hull_out = std::move(hull);
    return dedupe_facets(std::move(facets));
  }
  // dim == 3: brute force over point triples.
  const int n = static_cast<int>(pts.size());
  const double scale = coordinate_scale(pts);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int k = j + 1; k < n; ++k) {
        Eigen::Vector3d u = (pts[j] - pts[i]).head<3>();
        Eigen::Vector3d w = (pts[k] - pts[i]).head<3>();
        Eigen::Vector3d nrm = u.cross(w);
        if (nrm.norm() <= 1e-12 * scale * scale) continue;
        nrm.normalize();
        double c = nrm.dot(pts[i].head<3>());
        double above = 0.0, below = 0.0;
        for (const auto& p : pts) {
          double d = nrm.dot(p.head<3>()) - c;
          above = std::max(above, d);
          below = std::max(below, -d);
        }
        VectorXd normal = nrm;
        if (above <= g_tolerance * std::max(1.0, scale))
          facets.push_back({normal, c});
        if (below <= g_tolerance * std::max(1.0, scale))
          facets.push_back({-normal, -c});
      }
    }
  }
  facets = dedupe_facets(std::move(facets));
  // Extreme points: active facet normals span the space.
  hull_out->clear();
  for (const auto& p : pts) {
    MatrixXd active(0, 3);
    for (const auto& h : facets) {
      if (std::abs(h.normal.dot(p) - h.offset) <=
          g_tolerance * std::max(1.0, scale)) {
        active.conservativeResize(active.rows() + 1, 3);
        active.row(active.rows() - 1) = h.normal.transpose();
      }
    }
    if (active.rows() >= 3 &&
        Eigen::FullPivLU<MatrixXd>(active).rank() == 3)
      hull_out->push_back(p);
  }
  std::sort(hull_out->begin(), hull_out->end(),
            [](const VectorXd& a, const VectorXd& b) {
              for (int i = 0; i < a.size(); ++i) {
                if (a(i) != b(i)) return a(i) < b(i);
              }
              return false;
            });
  return facets;
}

void normalize_facets(std::vector<Halfspace>& facets) {
  for (auto& h : facets) {
    double n = h.normal.norm();
    if (n <= 1e-14) fail("zero facet normal");
    h.normal /= n;
    h.offset /= n;
  }
}

std::vector<VectorXd> enumerate_hrep_vertices(
    int dim, const std::vector<Halfspace>& facets) {
  std::vector<VectorXd> candidates;
  const int m = static_cast<int>(facets.size());
  auto feasible = [&](const VectorXd& x) {
    for (const auto& h : facets)
      if (h.normal.dot(x) - h.offset > g_tolerance) return false;
    return true;
  };
  if (dim == 1) {
    for (const auto& h : facets) {
      VectorXd x = h.normal * h.offset;  // unit normal, boundary point
      if (feasible(x)) candidates.push_back(x);
    }
  } else if (dim == 2) {
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        Eigen::Matrix2d a;
        a.row(0) = facets[i].normal.transpose();
        a.row(1) = facets[j].normal.transpose();
        if (std::abs(a.determinant()) <= 1e-12) continue;
        Eigen::Vector2d b(facets[i].offset, facets[j].offset);
        VectorXd x = a.inverse() * b;
        if (feasible(x)) candidates.push_back(x);
      }
    }
  } else if (dim == 3) {
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        for (int k = j + 1; k < m; ++k) {
          Eigen::Matrix3d a;
          a.row(0) = facets[i].normal.transpose();
          a.row(1) = facets[j].normal.transpose();
          a.row(2) = facets[k].normal.transpose();
          if (std::abs(a.determinant()) <= 1e-12) continue;
          Eigen::Vector3d b(facets[i].offset, facets[j].offset,
                            facets[k].offset);
          VectorXd x = a.inverse() * b;
          if (feasible(x)) candidates.push_back(x);
        }
      }
    }
  } else {
    fail("vertex enumeration unsupported above dimension 3");
  }
  double scale = candidates.empty() ? 1.0 : coordinate_scale(candidates);
  return dedupe_points(candidates, g_tolerance * std::max(1.0, scale));
}

// In 2-D, a nonempty {x : a_i.x <= b_i} is bounded iff the normals leave no
// angular gap of pi or more.
void check_bounded_2d(const std::vector<Halfspace>& facets) {
  std::vector<double> ang;
  ang.reserve(facets.size());
  for (const auto& h : facets) ang.push_back(std::atan2(h.normal(1), h.normal(0)));
  std::sort(ang.begin(), ang.end());
  double max_gap = 2 * M_PI - (ang.back() - ang.front());
  for (std::size_t i = 1; i < ang.size(); ++i)
    max_gap = std::max(max_gap, ang[i] - ang[i - 1]);
  if (max_gap >= M_PI - 1e-12) fail("half-space set is unbounded");
}

void check_bounded_1d(const std::vector<Halfspace>& facets) {
  bool pos = false, neg = false;
  for (const auto& h : facets) (h.normal(0) > 0 ? pos : neg) = true;
  if (!pos || !neg) fail("half-space set is unbounded");
}

}  // namespace

double polytope_tolerance() { return g_tolerance; }

void set_polytope_tolerance(double tol) {
  if (!(tol > 0)) throw std::invalid_argument("tolerance must be positive");
  g_tolerance = tol;
}

Polytope make_polytope_from_parts(int dim, bool empty,
                                  std::vector<Halfspace> hs,
                                  std::vector<VectorXd> vs, bool hrep_valid,
                                  bool vrep_valid) {
  Polytope p;
  p.dim_ = dim;
  p.empty_ = empty;
  p.halfspaces_ = std::move(hs);
  p.vertices_ = std::move(vs);
  p.hrep_valid_ = hrep_valid;
  p.vrep_valid_ = vrep_valid;
  return p;
}

Polytope Polytope::empty_set(int dim) {
  return make_polytope_from_parts(dim, true, {}, {}, false, true);
}

Polytope Polytope::singleton(const VectorXd& point) {
  const int dim = static_cast<int>(point.size());
  std::vector<Halfspace> facets;
  for (int i = 0; i < dim; ++i) {
    VectorXd e = VectorXd::Zero(dim);
    e(i) = 1.0;
    facets.push_back({e, point(i)});
    facets.push_back({-e, -point(i)});
  }
  return make_polytope_from_parts(dim, false, std::move(facets), {point}, true,
                                  true);
}

Polytope Polytope::from_box(const VectorXd& lower, const VectorXd& upper) {
  if (lower.size() != upper.size())
    throw std::invalid_argument("from_box: dimension mismatch");
  const int dim = static_cast<int>(lower.size());
  for (int i = 0; i < dim; ++i) {
    if (!(lower(i) < upper(i)))
      throw std::invalid_argument("from_box: degenerate interval");
  }
  std::vector<Halfspace> facets;
  for (int i = 0; i < dim; ++i) {
    VectorXd e = VectorXd::Zero(dim);
    e(i) = 1.0;
    facets.push_back({e, upper(i)});
    facets.push_back({-e, -lower(i)});
  }
  std::vector<VectorXd> verts;
  const int corners = 1 << dim;
  for (int mask = 0; mask < corners; ++mask) {
    VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = (mask >> i) & 1 ? upper(i) : lower(i);
    verts.push_back(v);
  }
  if (dim == 2) verts = convex_hull_ccw(verts);
  return make_polytope_from_parts(dim, false, std::move(facets),
                                  std::move(verts), true, true);
}

Polytope Polytope::from_vertices(int dim, const std::vector<VectorXd>& points) {
  for (const auto& p : points)
    if (p.size() != dim) throw std::invalid_argument("vertex dimension mismatch");
  const double scale = coordinate_scale(points);
  auto pts = dedupe_points(points, g_tolerance * std::max(1.0, scale));
  if (pts.empty()) return empty_set(dim);
  if (pts.size() == 1) return singleton(pts[0]);
  if (dim > 3)
    return make_polytope_from_parts(dim, false, {}, std::move(pts), false,
                                    true);

  AffineFrame frame = affine_frame(pts, dim);
  if (frame.rank == 0) return singleton(pts[0]);
  if (frame.rank == dim) {
    std::vector<VectorXd> hull;
    auto facets = facets_full_dim(pts, dim, &hull);
    return make_polytope_from_parts(dim, false, std::move(facets),
                                    std::move(hull), true, true);
  }
  // Lower-dimensional set: solve in the affine hull and lift back.
  std::vector<VectorXd> reduced;
  reduced.reserve(pts.size());
  for (const auto& p : pts)
    reduced.push_back(frame.basis.transpose() * (p - frame.center));
  std::vector<VectorXd> sub_hull;
  auto sub_facets = facets_full_dim(reduced, frame.rank, &sub_hull);

  std::vector<Halfspace> facets;
  for (const auto& h : sub_facets) {
    VectorXd normal = frame.basis * h.normal;
    facets.push_back({normal, h.offset + normal.dot(frame.center)});
  }
  for (int i = 0; i < frame.complement.cols(); ++i) {
    VectorXd n = frame.complement.col(i);
    double c = n.dot(frame.center);
    facets.push_back({n, c});
    facets.push_back({-n, -c});
  }
  std::vector<VectorXd> hull;
  hull.reserve(sub_hull.size());
  for (const auto& y : sub_hull) hull.push_back(frame.center + frame.basis * y);
  normalize_facets(facets);
  return make_polytope_from_parts(dim, false, std::move(facets),
                                  std::move(hull), true, true);
}

Polytope intersect_halfspaces(int dim, std::vector<Halfspace> facets) {
  if (dim > 3) fail("representation conversion unsupported above dimension 3");
  for (const auto& h : facets)
    if (h.normal.size() != dim) fail("facet dimension mismatch");
  normalize_facets(facets);
  facets = dedupe_facets(std::move(facets));
  if (dim == 1) check_bounded_1d(facets);
  if (dim == 2) check_bounded_2d(facets);
  auto verts = enumerate_hrep_vertices(dim, facets);
  if (verts.empty()) {
    return make_polytope_from_parts(dim, true, std::move(facets), {}, true,
                                    true);
  }
  // Canonicalize through the vertex set so only supported facets remain.
  return Polytope::from_vertices(dim, verts);
}

Polytope Polytope::from_halfspaces(int dim, std::vector<Halfspace> facets) {
  if (facets.empty()) throw std::invalid_argument("empty facet list");
  return intersect_halfspaces(dim, std::move(facets));
}

const std::vector<Halfspace>& Polytope::halfspaces() const {
  if (!hrep_valid_) fail("half-space representation unavailable");
  return halfspaces_;
}

const std::vector<VectorXd>& Polytope::vertices() const {
  if (!vrep_valid_) fail("vertex representation unavailable");
  return vertices_;
}

double Polytope::support(const VectorXd& direction) const {
  if (empty_) fail("support of empty set");
  if (!vrep_valid_) fail("support requires vertices");
  if (direction.size() != dim_) fail("support direction dimension mismatch");
  if (direction.lpNorm<Eigen::Infinity>() <= 0.0)
    throw std::invalid_argument("support direction must be nonzero");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : vertices_) best = std::max(best, direction.dot(v));
  return best;
}

bool Polytope::contains_point(const VectorXd& x, double tol) const {
  if (empty_) return false;
  if (!hrep_valid_) fail("membership requires half-spaces");
  for (const auto& h : halfspaces_)
    if (h.normal.dot(x) - h.offset > tol) return false;
  return true;
}

bool Polytope::contains_point(const VectorXd& x) const {
  return contains_point(x, g_tolerance);
}

bool Polytope::contains_origin() const {
  return contains_point(VectorXd::Zero(dim_), g_tolerance);
}

bool Polytope::is_cset() const { return !empty_ && contains_origin(); }

Polytope minkowski_sum(const Polytope& p, const Polytope& q) {
  if (p.dim() != q.dim()) fail("minkowski_sum: dimension mismatch");
  if (p.dim() > 3) fail("minkowski_sum unsupported above dimension 3");
  if (p.is_empty() || q.is_empty()) return Polytope::empty_set(p.dim());
  std::vector<VectorXd> sums;
  sums.reserve(p.vertices().size() * q.vertices().size());
  for (const auto& a : p.vertices())
    for (const auto& b : q.vertices()) sums.push_back(a + b);
  return Polytope::from_vertices(p.dim(), sums);
}

Polytope pontryagin_diff(const Polytope& p, const Polytope& q) {
  if (p.dim() != q.dim()) fail("pontryagin_diff: dimension mismatch");
  if (q.is_empty()) fail("pontryagin_diff: empty subtrahend");
  std::vector<Halfspace> facets;
  facets.reserve(p.halfspaces().size());
  for (const auto& h : p.halfspaces())
    facets.push_back({h.normal, h.offset - q.support(h.normal)});
  return intersect_halfspaces(p.dim(), std::move(facets));
}

Polytope linear_image(const MatrixXd& m, const Polytope& p) {
  if (m.cols() != p.dim()) fail("linear_image: dimension mismatch");
  if (p.is_empty()) return Polytope::empty_set(static_cast<int>(m.rows()));
  std::vector<VectorXd> image;
  image.reserve(p.vertices().size());
  for (const auto& v : p.vertices()) image.push_back(m * v);
  return Polytope::from_vertices(static_cast<int>(m.rows()), image);
}

bool is_subset(const Polytope& inner, const Polytope& outer,
               double* margin_out) {
  if (inner.is_empty()) {
    if (margin_out) *margin_out = std::numeric_limits<double>::infinity();
    return true;
  }
  if (outer.is_empty()) {
    if (margin_out) *margin_out = -std::numeric_limits<double>::infinity();
    return false;
  }
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& h : outer.halfspaces())
    margin = std::min(margin, h.offset - inner.support(h.normal));
  if (margin_out) *margin_out = margin;
  return margin >= -g_tolerance;
}

Polytope scale(const Polytope& p, double rho) {
  if (rho < 0) throw std::invalid_argument("scale: negative factor");
  if (p.is_empty()) return p;
  if (rho == 0.0) return Polytope::singleton(VectorXd::Zero(p.dim()));
  std::vector<VectorXd> verts;
  verts.reserve(p.vertices().size());
  for (const auto& v : p.vertices()) verts.push_back(rho * v);
  if (!p.has_hrep()) return Polytope::from_vertices(p.dim(), verts);
  std::vector<Halfspace> facets = p.halfspaces();
  for (auto& h : facets) h.offset *= rho;
  return make_polytope_from_parts(p.dim(), false, std::move(facets),
                                  std::move(verts), true, true);
}

double volume(const Polytope& p) {
  if (p.is_empty()) return 0.0;
  if (p.dim() == 1) {
    double lo = p.vertices()[0](0), hi = lo;
    for (const auto& v : p.vertices()) {
      lo = std::min(lo, v(0));
      hi = std::max(hi, v(0));
    }
    return hi - lo;
  }
  if (p.dim() == 2) {
    const auto& v = p.vertices();
    if (v.size() < 3) return 0.0;
    double twice = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto& a = v[i];
      const auto& b = v[(i + 1) % v.size()];
      twice += a(0) * b(1) - b(0) * a(1);
    }
    return std::abs(twice) / 2.0;
  }
  fail("volume unsupported above dimension 2");
}

Polytope intersect(const Polytope& p, const Polytope& q) {
  if (p.dim() != q.dim()) fail("intersect: dimension mismatch");
  if (p.is_empty() || q.is_empty()) return Polytope::empty_set(p.dim());
  std::vector<Halfspace> facets = p.halfspaces();
  const auto& qh = q.halfspaces();
  facets.insert(facets.end(), qh.begin(), qh.end());
  return intersect_halfspaces(p.dim(), std::move(facets));
}

std::pair<VectorXd, VectorXd> bounding_box(const Polytope& p) {
  if (p.is_empty()) fail("bounding_box of empty set");
  VectorXd lo = p.vertices()[0], hi = p.vertices()[0];
  for (const auto& v : p.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return {lo, hi};
}

}  // namespace retc
