#include "atmpc/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "atmpc/solver.hpp"

namespace atmpc {

namespace {

double coord_scale(const std::vector<Vec>& pts) {
  double s = 1.0;
  for (const auto& p : pts)
    if (p.size()) s = std::max(s, p.cwiseAbs().maxCoeff());
  return s;
}

bool lex_less(const Vec& a, const Vec& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) < b(i)) return true;
    if (a(i) > b(i)) return false;
  }
  return false;
}

std::vector<Vec> dedup(std::vector<Vec> pts, double tol) {
  std::sort(pts.begin(), pts.end(), lex_less);
  std::vector<Vec> out;
  for (auto& p : pts) {
    bool dup = false;
    for (const auto& q : out) {
      if ((p - q).cwiseAbs().maxCoeff() <= tol) {
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(std::move(p));
  }
  return out;
}

// Calls f on every k-subset of {0..n-1} in lexicographic order.
template <class F>
void for_each_subset(int n, int k, F&& f) {
  if (k > n) return;
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    f(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

struct Frame {
  Vec center;
  Mat basis;       // d x r, orthonormal columns
  Mat complement;  // d x (d - r)
};

Frame affine_frame(const std::vector<Vec>& pts, double tol) {
  const Eigen::Index d = pts.front().size();
  Frame f;
  f.center = Vec::Zero(d);
  for (const auto& p : pts) f.center += p;
  f.center /= static_cast<double>(pts.size());
  if (d == 0) {
    f.basis = Mat::Zero(0, 0);
    f.complement = Mat::Zero(0, 0);
    return f;
  }
  Mat D(d, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) D.col(static_cast<Eigen::Index>(i)) = pts[i] - f.center;
  Eigen::JacobiSVD<Mat> svd(D, Eigen::ComputeFullU);
  const Vec& sv = svd.singularValues();
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > tol) ++r;
  f.basis = svd.matrixU().leftCols(r);
  f.complement = svd.matrixU().rightCols(d - r);
  if (r == d) {
    f.basis = Mat::Identity(d, d);
    f.complement = Mat::Zero(d, 0);
  }
  return f;
}

struct HullResult {
  std::vector<int> vertex_ids;
  Mat normals;  // facets in the hull's own coordinates
  Vec offsets;
};

double cross2(const Vec& o, const Vec& a, const Vec& b) {
  return (a(0) - o(0)) * (b(1) - o(1)) - (a(1) - o(1)) * (b(0) - o(0));
}

HullResult hull_2d(const std::vector<Vec>& pts, double tol) {
  std::vector<int> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return lex_less(pts[a], pts[b]); });
  std::vector<int> h(2 * order.size());
  int k = 0;
  auto keep = [&](int o, int a, int b) {
    const double len = (pts[b] - pts[o]).norm();
    return cross2(pts[o], pts[a], pts[b]) > tol * std::max(len, 1e-300);
  };
  for (int id : order) {
    while (k >= 2 && !keep(h[k - 2], h[k - 1], id)) --k;
    h[k++] = id;
  }
  for (int i = static_cast<int>(order.size()) - 2, lo = k + 1; i >= 0; --i) {
    const int id = order[i];
    while (k >= lo && !keep(h[k - 2], h[k - 1], id)) --k;
    h[k++] = id;
  }
  h.resize(std::max(k - 1, 1));
  HullResult res;
  res.vertex_ids = h;
  const int m = static_cast<int>(h.size());
  res.normals.resize(m, 2);
  res.offsets.resize(m);
  for (int i = 0; i < m; ++i) {
    const Vec& a = pts[h[i]];
    const Vec& b = pts[h[(i + 1) % m]];
    Vec n(2);
    n << b(1) - a(1), a(0) - b(0);  // counter-clockwise order: outward normal
    n.normalize();
    res.normals.row(i) = n.transpose();
    res.offsets(i) = std::max(n.dot(a), n.dot(b));
  }
  return res;
}

HullResult hull_brute(const std::vector<Vec>& pts, double tol) {
  const int d = static_cast<int>(pts.front().size());
  const int n = static_cast<int>(pts.size());
  std::vector<Vec> normals;
  std::vector<double> offsets;
  for_each_subset(n, d, [&](const std::vector<int>& idx) {
    Mat D(d - 1, d);
    for (int i = 1; i < d; ++i) D.row(i - 1) = (pts[idx[i]] - pts[idx[0]]).transpose();
    Eigen::JacobiSVD<Mat> svd(D, Eigen::ComputeFullV);
    if (svd.singularValues()(d - 2) <= tol) return;
    Vec nrm = svd.matrixV().col(d - 1);
    double g = nrm.dot(pts[idx[0]]);
    bool all_le = true;
    bool all_ge = true;
    for (const auto& p : pts) {
      const double s = nrm.dot(p) - g;
      if (s > tol) all_le = false;
      if (s < -tol) all_ge = false;
    }
    if (!all_le && !all_ge) return;
    if (!all_le) {
      nrm = -nrm;
      g = -g;
    }
    for (std::size_t k = 0; k < normals.size(); ++k)
      if ((normals[k] - nrm).norm() <= 1e-9 && std::abs(offsets[k] - g) <= tol) return;
    normals.push_back(nrm);
    offsets.push_back(g);
  });
  HullResult res;
  res.normals.resize(static_cast<Eigen::Index>(normals.size()), d);
  res.offsets.resize(static_cast<Eigen::Index>(normals.size()));
  for (std::size_t k = 0; k < normals.size(); ++k) {
    res.normals.row(static_cast<Eigen::Index>(k)) = normals[k].transpose();
    res.offsets(static_cast<Eigen::Index>(k)) = offsets[k];
  }
  for (int i = 0; i < n; ++i) {
    std::vector<Vec> active;
    for (std::size_t k = 0; k < normals.size(); ++k)
      if (std::abs(normals[k].dot(pts[i]) - offsets[k]) <= tol) active.push_back(normals[k]);
    if (static_cast<int>(active.size()) < d) continue;
    Mat A(static_cast<Eigen::Index>(active.size()), d);
    for (std::size_t k = 0; k < active.size(); ++k) A.row(static_cast<Eigen::Index>(k)) = active[k].transpose();
    Eigen::FullPivLU<Mat> lu(A);
    lu.setThreshold(1e-9);
    if (lu.rank() == d) res.vertex_ids.push_back(i);
  }
  return res;
}

// Hull of full-dimensional points in their own coordinates (dim 0..4).
HullResult hull_full(const std::vector<Vec>& pts, double tol) {
  const Eigen::Index r = pts.front().size();
  HullResult res;
  if (r == 0) {
    res.vertex_ids = {0};
    res.normals = Mat::Zero(0, 0);
    res.offsets = Vec::Zero(0);
    return res;
  }
  if (r == 1) {
    int lo = 0;
    int hi = 0;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
      if (pts[i](0) < pts[lo](0)) lo = i;
      if (pts[i](0) > pts[hi](0)) hi = i;
    }
    res.vertex_ids = {lo, hi};
    res.normals.resize(2, 1);
    res.normals << 1.0, -1.0;
    res.offsets.resize(2);
    res.offsets << pts[hi](0), -pts[lo](0);
    return res;
  }
  if (r == 2) return hull_2d(pts, tol);
  return hull_brute(pts, tol);
}

void check_dim(int d) {
  if (d > kMaxDim)
    throw GeometryError(GeometryError::Kind::UnsupportedDimension,
                        "polytope dimension " + std::to_string(d) + " exceeds " + std::to_string(kMaxDim));
}

void sort_facets(HPolytope& h) {
  const int m = h.size();
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  if (h.dim() == 2) {
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return std::atan2(h.normals(a, 1), h.normals(a, 0)) < std::atan2(h.normals(b, 1), h.normals(b, 0));
    });
  } else {
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return lex_less(h.normals.row(a).transpose(), h.normals.row(b).transpose());
    });
  }
  HPolytope out;
  out.normals.resize(m, h.dim());
  out.offsets.resize(m);
  for (int i = 0; i < m; ++i) {
    out.normals.row(i) = h.normals.row(order[i]);
    out.offsets(i) = h.offsets(order[i]);
  }
  h = std::move(out);
}

}  // namespace

struct Polytope::Impl {
  enum class Source { Empty, H, V };
  int dim = 0;
  Source source = Source::Empty;
  Mat raw_normals;
  Vec raw_offsets;
  std::vector<Vec> raw_points;

  mutable std::once_flag once;
  mutable std::exception_ptr error;
  mutable bool empty = true;
  mutable int affine_dim = -1;
  mutable HPolytope h;
  mutable VPolytope v;

  void set_empty() const {
    empty = true;
    affine_dim = -1;
    v.vertices.clear();
    h.normals = Mat::Zero(dim == 0 ? 0 : 2, dim);
    h.offsets = Vec::Zero(dim == 0 ? 0 : 2);
    if (dim > 0) {
      h.normals(0, 0) = 1.0;
      h.normals(1, 0) = -1.0;
      h.offsets << -1.0, -1.0;
    }
  }

  void from_points(std::vector<Vec> pts) const {
    if (pts.empty()) {
      set_empty();
      return;
    }
    if (dim == 0) {
      empty = false;
      affine_dim = 0;
      v.vertices.assign(1, Vec::Zero(0));
      h.normals = Mat::Zero(0, 0);
      h.offsets = Vec::Zero(0);
      return;
    }
    const double scale = coord_scale(pts);
    const double tol = kGeomTol * scale;
    pts = dedup(std::move(pts), tol);
    const Frame f = affine_frame(pts, tol);
    const int r = static_cast<int>(f.basis.cols());
    std::vector<Vec> proj;
    proj.reserve(pts.size());
    for (const auto& p : pts) proj.push_back(f.basis.transpose() * (p - f.center));
    const HullResult hull = hull_full(proj, tol);

    empty = false;
    affine_dim = r;
    v.vertices.clear();
    for (int id : hull.vertex_ids) v.vertices.push_back(pts[id]);
    std::sort(v.vertices.begin(), v.vertices.end(), lex_less);

    const int nf = static_cast<int>(hull.normals.rows());
    const int ne = static_cast<int>(f.complement.cols());
    h.normals.resize(nf + 2 * ne, dim);
    h.offsets.resize(nf + 2 * ne);
    for (int k = 0; k < nf; ++k) {
      const Vec n = f.basis * hull.normals.row(k).transpose();
      h.normals.row(k) = n.transpose();
      h.offsets(k) = hull.offsets(k) + n.dot(f.center);
    }
    sort_facets_prefix(nf);
    for (int k = 0; k < ne; ++k) {
      const Vec n = f.complement.col(k);
      h.normals.row(nf + 2 * k) = n.transpose();
      h.offsets(nf + 2 * k) = n.dot(f.center);
      h.normals.row(nf + 2 * k + 1) = -n.transpose();
      h.offsets(nf + 2 * k + 1) = -n.dot(f.center);
    }
  }

  void sort_facets_prefix(int nf) const {
    HPolytope head{h.normals.topRows(nf), h.offsets.head(nf)};
    sort_facets(head);
    h.normals.topRows(nf) = head.normals;
    h.offsets.head(nf) = head.offsets;
  }

  void from_halfspaces() const {
    const double oscale = 1.0 + (raw_offsets.size() ? raw_offsets.cwiseAbs().maxCoeff() : 0.0);
    std::vector<int> rows;
    Mat H(raw_normals.rows(), dim);
    Vec g(raw_normals.rows());
    int m = 0;
    for (Eigen::Index k = 0; k < raw_normals.rows(); ++k) {
      const double nrm = raw_normals.row(k).norm();
      if (nrm < 1e-12) {
        if (raw_offsets(k) < -kGeomTol * oscale) {
          set_empty();
          return;
        }
        continue;
      }
      H.row(m) = raw_normals.row(k) / nrm;
      g(m) = raw_offsets(k) / nrm;
      ++m;
    }
    H.conservativeResize(m, dim);
    g.conservativeResize(m);
    if (dim == 0) {
      from_points({Vec::Zero(0)});
      return;
    }
    const double tol = kGeomTol * (1.0 + (m ? g.cwiseAbs().maxCoeff() : 0.0));

    std::vector<Vec> pts;
    Mat Asub(dim, dim);
    Vec bsub(dim);
    for_each_subset(m, dim, [&](const std::vector<int>& idx) {
      for (int i = 0; i < dim; ++i) {
        Asub.row(i) = H.row(idx[i]);
        bsub(i) = g(idx[i]);
      }
      Eigen::FullPivLU<Mat> lu(Asub);
      lu.setThreshold(1e-10);
      if (lu.rank() < dim) return;
      const Vec x = lu.solve(bsub);
      if (!x.allFinite()) return;
      if (m && (H * x - g).maxCoeff() > tol) return;
      pts.push_back(x);
    });

    if (pts.empty()) {
      LPProblem lp;
      lp.cost = Vec::Zero(dim);
      lp.A_ineq = H;
      lp.b_ineq = g;
      const SolveOutcome feas = solve_lp(lp);
      if (feas.status == SolveStatus::Infeasible) {
        set_empty();
        return;
      }
      throw GeometryError(GeometryError::Kind::Unbounded, "H-polytope is unbounded");
    }
    // Recession cone must be trivial.
    for (int i = 0; i < dim; ++i) {
      for (double sgn : {1.0, -1.0}) {
        LPProblem lp;
        lp.cost = Vec::Zero(dim);
        lp.cost(i) = -sgn;
        lp.A_ineq = H;
        lp.b_ineq = Vec::Zero(m);
        lp.lower = Vec::Constant(dim, -1.0);
        lp.upper = Vec::Constant(dim, 1.0);
        const SolveOutcome rec = solve_lp(lp);
        if (rec.optimal() && -rec.objective > 1e-9)
          throw GeometryError(GeometryError::Kind::Unbounded, "H-polytope is unbounded");
      }
    }
    from_points(std::move(pts));
  }

  void canonicalize() const {
    switch (source) {
      case Source::Empty: set_empty(); break;
      case Source::V: from_points(raw_points); break;
      case Source::H: from_halfspaces(); break;
    }
  }
};

Polytope::Polytope() {
  auto impl = std::make_shared<Impl>();
  impl->dim = 0;
  impl->source = Impl::Source::Empty;
  impl_ = impl;
}

Polytope Polytope::from_hrep(const Mat& normals, const Vec& offsets) {
  if (normals.rows() != offsets.size())
    throw GeometryError(GeometryError::Kind::DimensionMismatch, "from_hrep: normals/offsets size mismatch");
  check_dim(static_cast<int>(normals.cols()));
  auto impl = std::make_shared<Impl>();
  impl->dim = static_cast<int>(normals.cols());
  impl->source = Impl::Source::H;
  impl->raw_normals = normals;
  impl->raw_offsets = offsets;
  return Polytope(impl);
}

Polytope Polytope::from_vrep(const std::vector<Vec>& points) {
  auto impl = std::make_shared<Impl>();
  if (points.empty()) {
    impl->source = Impl::Source::Empty;
    return Polytope(impl);
  }
  impl->dim = static_cast<int>(points.front().size());
  check_dim(impl->dim);
  for (const auto& p : points)
    if (p.size() != impl->dim)
      throw GeometryError(GeometryError::Kind::DimensionMismatch, "from_vrep: points of mixed dimension");
  impl->source = Impl::Source::V;
  impl->raw_points = points;
  return Polytope(impl);
}

Polytope Polytope::from_vrep(const Mat& cols) {
  std::vector<Vec> pts;
  for (Eigen::Index j = 0; j < cols.cols(); ++j) pts.push_back(cols.col(j));
  if (pts.empty()) return empty(static_cast<int>(cols.rows()));
  return from_vrep(pts);
}

Polytope Polytope::point(const Vec& x) { return from_vrep(std::vector<Vec>{x}); }

Polytope Polytope::box(const Vec& lower, const Vec& upper) {
  if (lower.size() != upper.size())
    throw GeometryError(GeometryError::Kind::DimensionMismatch, "box: bound size mismatch");
  const Eigen::Index d = lower.size();
  Mat H(2 * d, d);
  H.setZero();
  Vec g(2 * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    H(2 * i, i) = 1.0;
    g(2 * i) = upper(i);
    H(2 * i + 1, i) = -1.0;
    g(2 * i + 1) = -lower(i);
  }
  return from_hrep(H, g);
}

Polytope Polytope::empty(int dim) {
  check_dim(dim);
  auto impl = std::make_shared<Impl>();
  impl->dim = dim;
  impl->source = Impl::Source::Empty;
  return Polytope(impl);
}

const Polytope::Impl& Polytope::canonical() const {
  std::call_once(impl_->once, [this] {
    try {
      impl_->canonicalize();
    } catch (...) {
      impl_->error = std::current_exception();
    }
  });
  if (impl_->error) std::rethrow_exception(impl_->error);
  return *impl_;
}

int Polytope::dim() const { return impl_->dim; }
bool Polytope::is_empty() const { return canonical().empty; }
int Polytope::affine_dim() const { return canonical().affine_dim; }
const HPolytope& Polytope::hrep() const { return canonical().h; }
const VPolytope& Polytope::vrep() const { return canonical().v; }

Mat Polytope::vertex_matrix() const {
  const auto& vs = vertices();
  Mat V(dim(), static_cast<Eigen::Index>(vs.size()));
  for (std::size_t j = 0; j < vs.size(); ++j) V.col(static_cast<Eigen::Index>(j)) = vs[j];
  return V;
}

VPolytope enumerate_vertices(const HPolytope& h) {
  const Polytope p = Polytope::from_hrep(h);
  if (p.is_empty()) throw GeometryError(GeometryError::Kind::Empty, "enumerate_vertices: infeasible facet system");
  return p.vrep();
}

HPolytope enumerate_facets(const VPolytope& v) {
  if (v.vertices.empty()) throw GeometryError(GeometryError::Kind::Empty, "enumerate_facets: no points");
  const Polytope p = Polytope::from_vrep(v.vertices);
  if (!p.is_full_dimensional())
    throw GeometryError(GeometryError::Kind::Degenerate, "enumerate_facets: points are not full-dimensional");
  return p.hrep();
}

namespace {

void require_same_dim(const Polytope& p, const Polytope& q, const char* op) {
  if (p.dim() != q.dim())
    throw GeometryError(GeometryError::Kind::DimensionMismatch,
                        std::string(op) + ": dimensions " + std::to_string(p.dim()) + " and " +
                            std::to_string(q.dim()));
}

}  // namespace

Polytope minkowski_sum(const Polytope& p, const Polytope& q) {
  require_same_dim(p, q, "minkowski_sum");
  if (p.is_empty() || q.is_empty()) return Polytope::empty(p.dim());
  std::vector<Vec> pts;
  pts.reserve(p.vertices().size() * q.vertices().size());
  for (const auto& a : p.vertices())
    for (const auto& b : q.vertices()) pts.push_back(a + b);
  return Polytope::from_vrep(pts);
}

Polytope pontryagin_diff(const Polytope& p, const Polytope& q) {
  require_same_dim(p, q, "pontryagin_diff");
  if (q.is_empty()) throw GeometryError(GeometryError::Kind::Empty, "pontryagin_diff: subtrahend is empty");
  if (p.is_empty()) return Polytope::empty(p.dim());
  const HPolytope& h = p.hrep();
  Vec g = h.offsets;
  for (int k = 0; k < h.size(); ++k) g(k) -= support(q, h.normals.row(k).transpose());
  return Polytope::from_hrep(h.normals, g);
}

Polytope intersect(const Polytope& p, const Polytope& q) {
  require_same_dim(p, q, "intersect");
  if (p.is_empty() || q.is_empty()) return Polytope::empty(p.dim());
  const HPolytope& a = p.hrep();
  const HPolytope& b = q.hrep();
  Mat H(a.size() + b.size(), p.dim());
  H << a.normals, b.normals;
  Vec g(a.size() + b.size());
  g << a.offsets, b.offsets;
  return Polytope::from_hrep(H, g);
}

double support(const Polytope& p, const Vec& d) {
  if (d.size() != p.dim()) throw GeometryError(GeometryError::Kind::DimensionMismatch, "support: direction size");
  if (p.is_empty()) throw GeometryError(GeometryError::Kind::Empty, "support: empty polytope");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : p.vertices()) best = std::max(best, d.dot(v));
  return best;
}

Polytope affine_image(const Mat& M, const Vec& c, const Polytope& p) {
  if (M.cols() != p.dim() || c.size() != M.rows())
    throw GeometryError(GeometryError::Kind::DimensionMismatch, "affine_image: matrix/offset/set dimensions");
  if (p.is_empty()) return Polytope::empty(static_cast<int>(M.rows()));
  std::vector<Vec> pts;
  for (const auto& v : p.vertices()) pts.push_back(M * v + c);
  return Polytope::from_vrep(pts);
}

Polytope scale(double factor, const Polytope& p) {
  return affine_image(factor * Mat::Identity(p.dim(), p.dim()), Vec::Zero(p.dim()), p);
}

Polytope matrix_set_product(const std::vector<Mat>& matrices, const Polytope& p) {
  if (matrices.empty()) throw GeometryError(GeometryError::Kind::Empty, "matrix_set_product: no matrices");
  const Eigen::Index rows = matrices.front().rows();
  for (const auto& M : matrices)
    if (M.cols() != p.dim() || M.rows() != rows)
      throw GeometryError(GeometryError::Kind::DimensionMismatch, "matrix_set_product: nonconformal matrix");
  if (p.is_empty()) return Polytope::empty(static_cast<int>(rows));
  std::vector<Vec> pts;
  for (const auto& M : matrices)
    for (const auto& v : p.vertices()) pts.push_back(M * v);
  return Polytope::from_vrep(pts);
}

double point_violation(const Polytope& p, const Vec& x) {
  if (x.size() != p.dim()) throw GeometryError(GeometryError::Kind::DimensionMismatch, "point_violation: size");
  const HPolytope& h = p.hrep();
  if (h.size() == 0) return p.is_empty() ? std::numeric_limits<double>::infinity() : 0.0;
  return (h.normals * x - h.offsets).maxCoeff();
}

bool contains_point(const Polytope& p, const Vec& x, double tol) {
  if (p.is_empty()) return false;
  return point_violation(p, x) <= tol;
}

double set_violation(const Polytope& inner, const Polytope& outer) {
  require_same_dim(inner, outer, "contains_set");
  if (outer.is_empty()) throw GeometryError(GeometryError::Kind::Empty, "contains_set: outer set is empty");
  if (inner.is_empty()) return -std::numeric_limits<double>::infinity();
  const HPolytope& h = outer.hrep();
  double worst = -std::numeric_limits<double>::infinity();
  if (h.size() == 0) return 0.0;
  const Mat V = inner.vertex_matrix();
  const Mat S = h.normals * V;
  for (int k = 0; k < h.size(); ++k) worst = std::max(worst, S.row(k).maxCoeff() - h.offsets(k));
  return worst;
}

bool contains_set(const Polytope& inner, const Polytope& outer, double tol) {
  return set_violation(inner, outer) <= tol;
}

BarycentricWeights barycentric_coordinates(const Vec& x, const std::vector<Vec>& points) {
  if (points.empty()) throw GeometryError(GeometryError::Kind::Empty, "barycentric_coordinates: no points");
  const Eigen::Index d = x.size();
  const Eigen::Index M = static_cast<Eigen::Index>(points.size());
  Mat V(d, M);
  for (Eigen::Index j = 0; j < M; ++j) {
    if (points[static_cast<std::size_t>(j)].size() != d)
      throw GeometryError(GeometryError::Kind::DimensionMismatch, "barycentric_coordinates: point size");
    V.col(j) = points[static_cast<std::size_t>(j)];
  }
  auto min_norm = [&](const Vec& target) {
    QPProblem qp;
    qp.H = Mat::Identity(M, M);
    qp.f = Vec::Zero(M);
    qp.A_eq.resize(d + 1, M);
    qp.A_eq << V, Mat::Ones(1, M);
    qp.b_eq.resize(d + 1);
    qp.b_eq << target, 1.0;
    qp.lower = Vec::Zero(M);
    return solve_qp(qp);
  };
  auto finish = [&](Vec w) {
    w = w.cwiseMax(0.0);
    w /= w.sum();
    return BarycentricWeights{w};
  };
  SolveOutcome sol = min_norm(x);
  if (sol.optimal()) return finish(sol.x);

  // Nearest point of the hull; accept when within tolerance.
  QPProblem near;
  near.H = V.transpose() * V + 1e-10 * Mat::Identity(M, M);
  near.f = -V.transpose() * x;
  near.A_eq = Mat::Ones(1, M);
  near.b_eq = Vec::Ones(1);
  near.lower = Vec::Zero(M);
  const SolveOutcome ns = solve_qp(near);
  if (!ns.optimal() || (V * ns.x - x).norm() > 1e-7)
    throw GeometryError(GeometryError::Kind::NotInHull, "barycentric_coordinates: point outside hull");
  sol = min_norm(V * ns.x);
  return finish(sol.optimal() ? sol.x : ns.x);
}

BarycentricWeights barycentric_coordinates(const Vec& x, const VPolytope& v) {
  return barycentric_coordinates(x, v.vertices);
}

double volume(const Polytope& p) {
  if (p.is_empty()) throw GeometryError(GeometryError::Kind::Empty, "volume: empty polytope");
  const int d = p.dim();
  if (d == 0) return 1.0;
  if (p.affine_dim() < d) return 0.0;
  const auto& vs = p.vertices();
  if (d == 1) return vs.back()(0) - vs.front()(0);
  if (d == 2) {
    Vec c = Vec::Zero(2);
    for (const auto& v : vs) c += v;
    c /= static_cast<double>(vs.size());
    std::vector<Vec> ring = vs;
    std::sort(ring.begin(), ring.end(), [&](const Vec& a, const Vec& b) {
      return std::atan2(a(1) - c(1), a(0) - c(0)) < std::atan2(b(1) - c(1), b(0) - c(0));
    });
    double area = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const Vec& a = ring[i];
      const Vec& b = ring[(i + 1) % ring.size()];
      area += a(0) * b(1) - a(1) * b(0);
    }
    return 0.5 * std::abs(area);
  }
  Vec lo = vs.front();
  Vec hi = vs.front();
  for (const auto& v : vs) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  std::mt19937_64 rng(20240917ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int samples = 100000;
  const HPolytope& h = p.hrep();
  int inside = 0;
  Vec x(d);
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < d; ++i) x(i) = lo(i) + (hi(i) - lo(i)) * unit(rng);
    if ((h.normals * x - h.offsets).maxCoeff() <= 0.0) ++inside;
  }
  return (hi - lo).prod() * static_cast<double>(inside) / samples;
}

Ball chebyshev_center(const Polytope& p) {
  if (p.is_empty()) throw GeometryError(GeometryError::Kind::Empty, "chebyshev_center: empty polytope");
  const int d = p.dim();
  const HPolytope& h = p.hrep();
  if (h.size() == 0) return {Vec::Zero(d), 0.0};
  LPProblem lp;
  lp.cost = Vec::Zero(d + 1);
  lp.cost(d) = -1.0;
  lp.A_ineq.resize(h.size(), d + 1);
  lp.A_ineq << h.normals, Vec::Ones(h.size());
  lp.b_ineq = h.offsets;
  lp.lower = Vec::Constant(d + 1, -std::numeric_limits<double>::infinity());
  lp.lower(d) = 0.0;
  const SolveOutcome sol = solve_lp(lp);
  if (!sol.optimal()) throw GeometryError(GeometryError::Kind::Empty, "chebyshev_center: LP failed");
  double r = sol.x(d);
  if (p.affine_dim() < d || r < kGeomTol) r = 0.0;
  return {sol.x.head(d), r};
}

std::vector<Vec> template_directions(int dim, int count) {
  std::vector<Vec> dirs;
  if (dim == 1) {
    dirs.push_back(Vec::Constant(1, 1.0));
    dirs.push_back(Vec::Constant(1, -1.0));
    return dirs;
  }
  if (dim == 2) {
    for (int k = 0; k < count; ++k) {
      const double th = 2.0 * std::numbers::pi * k / count;
      Vec d(2);
      d << std::cos(th), std::sin(th);
      dirs.push_back(d);
    }
    return dirs;
  }
  for (int i = 0; i < dim; ++i) {
    for (double s : {1.0, -1.0}) {
      Vec d = Vec::Zero(dim);
      d(i) = s;
      dirs.push_back(d);
    }
  }
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j)
      for (double si : {1.0, -1.0})
        for (double sj : {1.0, -1.0}) {
          Vec d = Vec::Zero(dim);
          d(i) = si / std::sqrt(2.0);
          d(j) = sj / std::sqrt(2.0);
          dirs.push_back(d);
        }
  return dirs;
}

Polytope outer_approximation(const Polytope& p, int count) {
  if (p.is_empty()) return Polytope::empty(p.dim());
  if (p.dim() == 0) return p;
  const auto dirs = template_directions(p.dim(), count);
  Mat H(static_cast<Eigen::Index>(dirs.size()), p.dim());
  Vec g(static_cast<Eigen::Index>(dirs.size()));
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    H.row(static_cast<Eigen::Index>(k)) = dirs[k].transpose();
    g(static_cast<Eigen::Index>(k)) = support(p, dirs[k]);
  }
  return Polytope::from_hrep(H, g);
}

Polytope cap_complexity(const Polytope& p, int max_facets, int max_vertices, int template_count) {
  if (p.is_empty()) return p;
  if (p.num_facets() <= max_facets && p.num_vertices() <= max_vertices) return p;
  return outer_approximation(p, template_count);
}

}  // namespace atmpc
