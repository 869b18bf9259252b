#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "atmpc/common.hpp"
#include "atmpc/polytope.hpp"

namespace atmpc {

/// psi = [A B], an n x (n+m) matrix.
using ParamMatrix = Mat;

class UncertaintyError : public std::runtime_error {
 public:
  enum class Kind { EmptyResult, ChartViolation };
  UncertaintyError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Affine coordinates psi = origin + sum_k c_k basis[k] with a basis that is
/// orthonormal in the Frobenius inner product.
struct AffineChart {
  ParamMatrix origin;
  std::vector<ParamMatrix> basis;

  int rank() const { return static_cast<int>(basis.size()); }
  ParamMatrix lift(const Vec& coords) const;
  Vec coords(const ParamMatrix& psi) const;
  /// Frobenius distance from psi to the chart's affine hull.
  double residual(const ParamMatrix& psi) const;
};

AffineChart build_chart(const std::vector<ParamMatrix>& vertices);

/// Linear constraint normal' c <= offset on chart coordinates.
struct Halfspace {
  Vec normal;
  double offset = 0.0;
};

/// Parametric uncertainty set stored as a polytope in chart coordinates.
struct ParamSet {
  AffineChart chart;
  Polytope poly;

  int vertex_count() const { return poly.num_vertices(); }
  std::vector<ParamMatrix> vertex_matrices() const;
  bool contains(const ParamMatrix& psi, double tol = 1e-8) const;
};

ParamSet make_param_set(const std::vector<ParamMatrix>& vertices);

/// Parameters consistent with one transition: h'(x_now - psi [x_prev; u_prev]) <= g
/// for every facet (h, g) of D.
std::vector<Halfspace> nonfalsified_halfspaces(const Vec& x_now, const Vec& x_prev, const Vec& u_prev,
                                               const Polytope& D, const AffineChart& chart);

/// prev intersected with the cuts.  When the exact result would have more
/// than max_vertices vertices, cuts are applied one at a time from the
/// deepest and any cut that would break the bound is skipped, so the result
/// stays inside prev and never loses a parameter that satisfies all cuts.
/// Throws EmptyResult when the intersection is empty.
ParamSet refine_set(const ParamSet& prev, const std::vector<Halfspace>& cuts, int max_vertices);

/// psi_hat + kappa (x_now - psi_hat g) g' / (1 + g'g).
ParamMatrix gradient_step(const ParamMatrix& psi_hat_prev, const Vec& x_now, const Vec& g_prev, double kappa);

/// psi_bar itself when it lies in the set, otherwise the Frobenius-nearest
/// element of the set.
ParamMatrix project_to_set(const ParamMatrix& psi_bar, const ParamSet& set);

/// Convex hull of the set and one more parameter from the chart's affine hull.
ParamSet hull_with_point(const ParamSet& set, const ParamMatrix& psi);

struct ComponentVertices {
  std::vector<Mat> psi_A;
  std::vector<Mat> psi_B;
  std::vector<Mat> phi_A;  // psi_A[i] - A_hat
  std::vector<Mat> phi_B;  // psi_B[i] - B_hat
};

ComponentVertices component_vertex_sets(const ParamSet& set, const ParamMatrix& psi_hat, int n);

}  // namespace atmpc
