#pragma once

#include <Eigen/Dense>

#include <vector>

namespace retc {

// Absolute tolerance shared by facet slack checks, containment margins and
// vertex deduplication. One global knob, default 1e-9.
double polytope_tolerance();
void set_polytope_tolerance(double tol);

// Closed half-space {x : normal.dot(x) <= offset}. Normals are stored with
// unit Euclidean length, so offsets and margins are distances.
struct Halfspace {
  Eigen::VectorXd normal;
  double offset = 0.0;
};

// Convex polytope with synchronized half-space and vertex representations.
// Explicit representation conversion is supported for dim <= 3; higher
// dimensions carry vertices only (support-function queries still work).
// Degenerate (lower-dimensional) sets are stored with paired facets
// a.x <= c, -a.x <= -c and have zero volume.
class Polytope {
 public:
  // Default-constructed value: the empty set in dimension 0.
  Polytope() = default;

  static Polytope empty_set(int dim);
  static Polytope singleton(const Eigen::VectorXd& point);
  // Axis-aligned box; requires lower < upper componentwise.
  static Polytope from_box(const Eigen::VectorXd& lower,
                           const Eigen::VectorXd& upper);
  // Builds both representations; the input set must be bounded and dim <= 3.
  static Polytope from_halfspaces(int dim, std::vector<Halfspace> facets);
  // Convex hull of the given points. For dim <= 3 both representations are
  // built; above that only the vertex cloud is kept.
  static Polytope from_vertices(int dim,
                                const std::vector<Eigen::VectorXd>& points);

  int dim() const { return dim_; }
  bool is_empty() const { return empty_; }
  bool has_hrep() const { return hrep_valid_; }
  bool has_vrep() const { return vrep_valid_; }
  const std::vector<Halfspace>& halfspaces() const;
  const std::vector<Eigen::VectorXd>& vertices() const;

  // max_{v in P} d.v; requires a nonempty set and a nonzero direction.
  double support(const Eigen::VectorXd& direction) const;
  bool contains_point(const Eigen::VectorXd& x, double tol) const;
  bool contains_point(const Eigen::VectorXd& x) const;
  bool contains_origin() const;
  // Compact, convex, contains the origin.
  bool is_cset() const;

 private:
  int dim_ = 0;
  bool empty_ = true;
  bool hrep_valid_ = false;
  bool vrep_valid_ = false;
  std::vector<Halfspace> halfspaces_;
  std::vector<Eigen::VectorXd> vertices_;

  friend Polytope make_polytope_from_parts(int dim, bool empty,
                                           std::vector<Halfspace> hs,
                                           std::vector<Eigen::VectorXd> vs,
                                           bool hrep_valid, bool vrep_valid);
};

Polytope minkowski_sum(const Polytope& p, const Polytope& q);
// {x : a_i.x <= b_i - h_Q(a_i)} over the facets of p. The result may be
// empty; that is a valid outcome, not an error.
Polytope pontryagin_diff(const Polytope& p, const Polytope& q);
Polytope linear_image(const Eigen::MatrixXd& m, const Polytope& p);
// True iff inner is contained in outer. margin_out (optional) receives
// min over outer facets of (offset - h_inner(normal)).
bool is_subset(const Polytope& inner, const Polytope& outer,
               double* margin_out = nullptr);
Polytope scale(const Polytope& p, double rho);
// Length in 1-D, area in 2-D; degenerate sets have volume 0.
double volume(const Polytope& p);
Polytope intersect(const Polytope& p, const Polytope& q);
// Polytope defined by an explicit facet list (bounded input, dim <= 3).
// Unlike from_halfspaces this reports an empty intersection as the empty
// set instead of throwing.
Polytope intersect_halfspaces(int dim, std::vector<Halfspace> facets);
// Componentwise vertex bounds, as (lower, upper).
std::pair<Eigen::VectorXd, Eigen::VectorXd> bounding_box(const Polytope& p);

}  // namespace retc
