#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "atmpc/common.hpp"

namespace atmpc {

class GeometryError : public std::runtime_error {
 public:
  enum class Kind { Unbounded, Empty, Degenerate, DimensionMismatch, NotInHull, UnsupportedDimension };
  GeometryError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// {x : normals * x <= offsets}.  Rows of `normals` have unit 2-norm.
struct HPolytope {
  Mat normals;
  Vec offsets;

  int dim() const { return static_cast<int>(normals.cols()); }
  int size() const { return static_cast<int>(normals.rows()); }
};

struct VPolytope {
  std::vector<Vec> vertices;
};

struct BarycentricWeights {
  Vec weights;
};

inline constexpr int kMaxDim = 4;

/// Minimal vertex set of a bounded H-polytope, sorted lexicographically.
/// Throws Unbounded or Empty.
VPolytope enumerate_vertices(const HPolytope& h);

/// Minimal facet description of the convex hull of full-dimensional points.
/// Throws Degenerate when the points span a lower-dimensional affine set.
HPolytope enumerate_facets(const VPolytope& v);

/// Immutable convex polytope with cached vertex and facet descriptions.
///
/// Lower-dimensional sets are supported: their facet description then
/// contains opposing pairs of rows that pin the affine hull.
class Polytope {
 public:
  /// Empty set in R^0.
  Polytope();

  static Polytope from_hrep(const Mat& normals, const Vec& offsets);
  static Polytope from_hrep(const HPolytope& h) { return from_hrep(h.normals, h.offsets); }
  static Polytope from_vrep(const std::vector<Vec>& points);
  static Polytope from_vrep(const Mat& points_as_columns);
  static Polytope point(const Vec& x);
  static Polytope box(const Vec& lower, const Vec& upper);
  static Polytope empty(int dim);

  int dim() const;
  bool is_empty() const;
  /// Dimension of the affine hull (-1 when empty).
  int affine_dim() const;
  bool is_full_dimensional() const { return !is_empty() && affine_dim() == dim(); }

  /// Irredundant facets.  For an empty set this is an infeasible pair of rows.
  const HPolytope& hrep() const;
  /// Minimal vertices in lexicographic order.
  const VPolytope& vrep() const;
  const std::vector<Vec>& vertices() const { return vrep().vertices; }
  int num_vertices() const { return static_cast<int>(vertices().size()); }
  int num_facets() const { return hrep().size(); }

  /// Vertices as columns of a dim x M matrix.
  Mat vertex_matrix() const;

 private:
  struct Impl;
  explicit Polytope(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  const Impl& canonical() const;
  std::shared_ptr<const Impl> impl_;
};

Polytope minkowski_sum(const Polytope& p, const Polytope& q);
Polytope pontryagin_diff(const Polytope& p, const Polytope& q);
Polytope intersect(const Polytope& p, const Polytope& q);
/// max over p of d'x.  Throws Empty.
double support(const Polytope& p, const Vec& d);
Polytope affine_image(const Mat& M, const Vec& c, const Polytope& p);
Polytope scale(double factor, const Polytope& p);
/// conv{ M_i v_j }.
Polytope matrix_set_product(const std::vector<Mat>& matrices, const Polytope& p);

bool contains_point(const Polytope& p, const Vec& x, double tol = kGeomTol);
/// Largest violation max_k (h_k'x - g_k); negative when strictly inside.
double point_violation(const Polytope& p, const Vec& x);
bool contains_set(const Polytope& inner, const Polytope& outer, double tol = kInclusionTol);
/// Largest violation max_k (supp_inner(h_k) - g_k) over facets of outer.
double set_violation(const Polytope& inner, const Polytope& outer);

/// Minimum-norm convex weights reproducing x from the given points.
/// Throws NotInHull when x is farther than 1e-7 from conv(points).
BarycentricWeights barycentric_coordinates(const Vec& x, const std::vector<Vec>& points);
BarycentricWeights barycentric_coordinates(const Vec& x, const VPolytope& v);

/// Lebesgue measure in the ambient dimension: exact in dim <= 2, seeded Monte
/// Carlo with 10^5 samples in dim 3-4.  Lower-dimensional sets have volume 0.
double volume(const Polytope& p);

struct Ball {
  Vec center;
  double radius = 0.0;
};
Ball chebyshev_center(const Polytope& p);

/// Fixed template of unit directions: in 2D `count` equally spaced angles,
/// otherwise the axes and their pairwise diagonals.
std::vector<Vec> template_directions(int dim, int count);
/// Outer approximation {x : d'x <= supp_p(d)} over template directions.
Polytope outer_approximation(const Polytope& p, int count);
/// Returns p unchanged when it has at most max_facets facets and at most
/// max_vertices vertices, otherwise its template outer approximation.
Polytope cap_complexity(const Polytope& p, int max_facets, int max_vertices, int template_count);

}  // namespace atmpc
