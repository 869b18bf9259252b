#include "atmpc/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "atmpc/solver.hpp"

namespace atmpc {

ParamMatrix AffineChart::lift(const Vec& c) const {
  ParamMatrix psi = origin;
  for (int k = 0; k < rank(); ++k) psi += c(k) * basis[static_cast<std::size_t>(k)];
  return psi;
}

Vec AffineChart::coords(const ParamMatrix& psi) const {
  Vec c(rank());
  const ParamMatrix diff = psi - origin;
  for (int k = 0; k < rank(); ++k) c(k) = (diff.array() * basis[static_cast<std::size_t>(k)].array()).sum();
  return c;
}

double AffineChart::residual(const ParamMatrix& psi) const { return (psi - lift(coords(psi))).norm(); }

AffineChart build_chart(const std::vector<ParamMatrix>& vertices) {
  if (vertices.empty()) throw UncertaintyError(UncertaintyError::Kind::ChartViolation, "build_chart: no vertices");
  AffineChart chart;
  chart.origin = vertices.front();
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    ParamMatrix d = vertices[i] - chart.origin;
    // Two Gram-Schmidt passes for numerical orthogonality.
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : chart.basis) d -= (d.array() * b.array()).sum() * b;
    const double nrm = d.norm();
    if (nrm < 1e-10) continue;
    chart.basis.push_back(d / nrm);
  }
  return chart;
}

std::vector<ParamMatrix> ParamSet::vertex_matrices() const {
  std::vector<ParamMatrix> out;
  for (const auto& c : poly.vertices()) out.push_back(chart.lift(c));
  return out;
}

bool ParamSet::contains(const ParamMatrix& psi, double tol) const {
  if (chart.residual(psi) > tol) return false;
  return contains_point(poly, chart.coords(psi), tol);
}

ParamSet make_param_set(const std::vector<ParamMatrix>& vertices) {
  ParamSet s;
  s.chart = build_chart(vertices);
  std::vector<Vec> pts;
  for (const auto& v : vertices) pts.push_back(s.chart.coords(v));
  s.poly = Polytope::from_vrep(pts);
  return s;
}

std::vector<Halfspace> nonfalsified_halfspaces(const Vec& x_now, const Vec& x_prev, const Vec& u_prev,
                                               const Polytope& D, const AffineChart& chart) {
  Vec g(x_prev.size() + u_prev.size());
  g << x_prev, u_prev;
  const HPolytope& h = D.hrep();
  const Vec base = x_now - chart.origin * g;
  std::vector<Vec> basis_g;
  for (const auto& b : chart.basis) basis_g.push_back(b * g);
  std::vector<Halfspace> out;
  for (int k = 0; k < h.size(); ++k) {
    const Vec hd = h.normals.row(k).transpose();
    Halfspace hs;
    hs.normal.resize(chart.rank());
    for (int j = 0; j < chart.rank(); ++j) hs.normal(j) = -hd.dot(basis_g[static_cast<std::size_t>(j)]);
    hs.offset = h.offsets(k) - hd.dot(base);
    out.push_back(hs);
  }
  return out;
}

namespace {

Polytope apply_cuts(const Polytope& poly, const std::vector<Halfspace>& cuts) {
  const int r = poly.dim();
  const HPolytope& h = poly.hrep();
  Mat H(h.size() + static_cast<int>(cuts.size()), r);
  Vec g(H.rows());
  H.topRows(h.size()) = h.normals;
  g.head(h.size()) = h.offsets;
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    H.row(h.size() + static_cast<Eigen::Index>(k)) = cuts[k].normal.transpose();
    g(h.size() + static_cast<Eigen::Index>(k)) = cuts[k].offset;
  }
  return Polytope::from_hrep(H, g);
}

// Splits off cuts without direction: vacuous ones are dropped, violated ones
// mean the data falsify every parameter.
std::vector<Halfspace> informative_cuts(const std::vector<Halfspace>& cuts) {
  std::vector<Halfspace> out;
  for (const auto& c : cuts) {
    const double nrm = c.normal.size() ? c.normal.norm() : 0.0;
    if (nrm <= 1e-12) {
      if (c.offset < -kGeomTol * (1.0 + std::abs(c.offset)))
        throw UncertaintyError(UncertaintyError::Kind::EmptyResult,
                               "refine_set: data falsify every parameter (disturbance outside D?)");
      continue;
    }
    out.push_back({c.normal / nrm, c.offset / nrm});
  }
  return out;
}

}  // namespace

ParamSet refine_set(const ParamSet& prev, const std::vector<Halfspace>& cuts, int max_vertices) {
  const std::vector<Halfspace> live = informative_cuts(cuts);
  if (live.empty()) return prev;
  // Keep only cuts that actually clip the current set.
  std::vector<std::pair<double, Halfspace>> clipping;
  for (const auto& c : live) {
    double depth = -std::numeric_limits<double>::infinity();
    for (const auto& v : prev.poly.vertices()) depth = std::max(depth, c.normal.dot(v) - c.offset);
    if (depth > kGeomTol) clipping.emplace_back(depth, c);
  }
  if (clipping.empty()) return prev;

  std::vector<Halfspace> all;
  for (const auto& dc : clipping) all.push_back(dc.second);
  ParamSet out{prev.chart, apply_cuts(prev.poly, all)};
  if (out.poly.is_empty())
    throw UncertaintyError(UncertaintyError::Kind::EmptyResult,
                           "refine_set: uncertainty set became empty (modeling assumptions violated)");
  if (out.poly.num_vertices() <= max_vertices) return out;

  std::stable_sort(clipping.begin(), clipping.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  Polytope cur = prev.poly;
  for (const auto& dc : clipping) {
    const Polytope next = apply_cuts(cur, {dc.second});
    if (next.is_empty())
      throw UncertaintyError(UncertaintyError::Kind::EmptyResult,
                             "refine_set: uncertainty set became empty (modeling assumptions violated)");
    if (next.num_vertices() <= max_vertices) cur = next;
  }
  return ParamSet{prev.chart, cur};
}

ParamMatrix gradient_step(const ParamMatrix& psi_hat_prev, const Vec& x_now, const Vec& g_prev, double kappa) {
  const Vec e = x_now - psi_hat_prev * g_prev;
  return psi_hat_prev + kappa * e * g_prev.transpose() / (1.0 + g_prev.squaredNorm());
}

ParamMatrix project_to_set(const ParamMatrix& psi_bar, const ParamSet& set) {
  const Vec c = set.chart.coords(psi_bar);
  if (set.chart.residual(psi_bar) <= 1e-9 && contains_point(set.poly, c, 1e-9)) return psi_bar;
  const int r = set.chart.rank();
  if (r == 0) return set.chart.origin;
  // Out-of-chart residual is constant, so only the in-chart part is optimized.
  QPProblem qp;
  qp.H = Mat::Identity(r, r);
  qp.f = -c;
  qp.A_ineq = set.poly.hrep().normals;
  qp.b_ineq = set.poly.hrep().offsets;
  const SolveOutcome s = solve_qp(qp);
  if (!s.optimal())
    throw UncertaintyError(UncertaintyError::Kind::EmptyResult, "project_to_set: projection QP failed");
  return set.chart.lift(s.x);
}

ParamSet hull_with_point(const ParamSet& set, const ParamMatrix& psi) {
  if (set.chart.residual(psi) > 1e-8)
    throw UncertaintyError(UncertaintyError::Kind::ChartViolation, "hull_with_point: parameter leaves the chart");
  std::vector<Vec> pts = set.poly.vertices();
  pts.push_back(set.chart.coords(psi));
  return ParamSet{set.chart, Polytope::from_vrep(pts)};
}

ComponentVertices component_vertex_sets(const ParamSet& set, const ParamMatrix& psi_hat, int n) {
  ComponentVertices out;
  const Eigen::Index m = psi_hat.cols() - n;
  const Mat A_hat = psi_hat.leftCols(n);
  const Mat B_hat = psi_hat.rightCols(m);
  for (const auto& psi : set.vertex_matrices()) {
    out.psi_A.push_back(psi.leftCols(n));
    out.psi_B.push_back(psi.rightCols(m));
    out.phi_A.push_back(psi.leftCols(n) - A_hat);
    out.phi_B.push_back(psi.rightCols(m) - B_hat);
  }
  return out;
}

}  // namespace atmpc
