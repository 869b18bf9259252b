#pragma once

// Brute-force reference implementations used to cross-check the library.
// They favour obviousness over speed and share no code with src/.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline double cross(const Vec& o, const Vec& a, const Vec& b) {
  return (a(0) - o(0)) * (b(1) - o(1)) - (a(1) - o(1)) * (b(0) - o(0));
}

// Gift wrapping (Jarvis march) hull of 2D points, counter-clockwise, with
// collinear points dropped.
inline std::vector<Vec> hull_2d(std::vector<Vec> pts, double tol = 1e-9) {
  std::vector<Vec> uniq;
  for (const auto& p : pts) {
    bool dup = false;
    for (const auto& q : uniq) dup = dup || (p - q).norm() <= tol;
    if (!dup) uniq.push_back(p);
  }
  if (uniq.size() < 3) return uniq;
  std::size_t start = 0;
  for (std::size_t i = 1; i < uniq.size(); ++i)
    if (uniq[i](0) < uniq[start](0) || (uniq[i](0) == uniq[start](0) && uniq[i](1) < uniq[start](1))) start = i;
  std::vector<Vec> hull;
  std::size_t cur = start;
  do {
    hull.push_back(uniq[cur]);
    std::size_t next = (cur + 1) % uniq.size();
    for (std::size_t i = 0; i < uniq.size(); ++i) {
      if (i == cur) continue;
      const double c = cross(uniq[cur], uniq[next], uniq[i]);
      const double dn = (uniq[next] - uniq[cur]).norm();
      const double di = (uniq[i] - uniq[cur]).norm();
      if (c < -tol * std::max(dn, di) || (std::abs(c) <= tol * std::max(dn, di) && di > dn)) next = i;
    }
    cur = next;
  } while (cur != start && hull.size() <= uniq.size());
  return hull;
}

inline double hull_area(const std::vector<Vec>& ccw) {
  double a = 0.0;
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    const Vec& p = ccw[i];
    const Vec& q = ccw[(i + 1) % ccw.size()];
    a += p(0) * q(1) - p(1) * q(0);
  }
  return 0.5 * std::abs(a);
}

// Vertices of {x : Hx <= g} in 2D: intersect every pair of facet lines and
// keep the feasible, distinct points.
inline std::vector<Vec> pairwise_vertices(const Mat& H, const Vec& g, double tol = 1e-9) {
  std::vector<Vec> out;
  for (Eigen::Index i = 0; i < H.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < H.rows(); ++j) {
      Eigen::Matrix2d A;
      A << H(i, 0), H(i, 1), H(j, 0), H(j, 1);
      if (std::abs(A.determinant()) < 1e-12) continue;
      Eigen::Vector2d b(g(i), g(j));
      Vec x = A.inverse() * b;
      if ((H * x - g).maxCoeff() > tol) continue;
      bool dup = false;
      for (const auto& q : out) dup = dup || (x - q).norm() <= 1e-7;
      if (!dup) out.push_back(x);
    }
  }
  return out;
}

inline bool in_h(const Mat& H, const Vec& g, const Vec& x, double tol) {
  return H.rows() == 0 || (H * x - g).maxCoeff() <= tol;
}

// Uniform grid over [lo, hi]^2 with n points per axis.
inline std::vector<Vec> grid_2d(double lo, double hi, int n) {
  std::vector<Vec> pts;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Vec x(2);
      x << lo + (hi - lo) * i / (n - 1), lo + (hi - lo) * j / (n - 1);
      pts.push_back(x);
    }
  return pts;
}

// Point-in-convex-polygon test against a counter-clockwise vertex ring.
inline bool in_ring(const std::vector<Vec>& ccw, const Vec& x, double tol) {
  if (ccw.size() < 3) return false;
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    const Vec& a = ccw[i];
    const Vec& b = ccw[(i + 1) % ccw.size()];
    if (cross(a, b, x) < -tol * (b - a).norm()) return false;
  }
  return true;
}

struct QPRef {
  bool feasible = false;
  Vec x;
  double objective = std::numeric_limits<double>::infinity();
};

// min 1/2 x'Hx + f'x s.t. Ax <= b by enumerating every active set and
// solving the equality-constrained KKT system; H must be positive definite.
inline QPRef qp_exhaustive(const Mat& H, const Vec& f, const Mat& A, const Vec& b, double tol = 1e-9) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(H.rows());
  QPRef best;
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) act.push_back(i);
    const int k = static_cast<int>(act.size());
    if (k > n) continue;
    Mat K = Mat::Zero(n + k, n + k);
    Vec r(n + k);
    K.topLeftCorner(n, n) = H;
    r.head(n) = -f;
    for (int i = 0; i < k; ++i) {
      K.block(n + i, 0, 1, n) = A.row(act[i]);
      K.block(0, n + i, n, 1) = A.row(act[i]).transpose();
      r(n + i) = b(act[i]);
    }
    Eigen::FullPivLU<Mat> lu(K);
    if (lu.rank() < n + k) continue;
    const Vec sol = lu.solve(r);
    const Vec x = sol.head(n);
    if (k && sol.tail(k).minCoeff() < -tol) continue;
    if (m && (A * x - b).maxCoeff() > tol) continue;
    const double obj = 0.5 * x.dot(H * x) + f.dot(x);
    if (obj < best.objective) {
      best = {true, x, obj};
    }
  }
  return best;
}

// Nearest point of a 2D convex polygon (given as a ccw ring) to y by dense
// sampling of the polygon's bounding box.
inline Vec nearest_on_grid(const std::vector<Vec>& ccw, const Vec& y, int n = 2001) {
  double lo0 = ccw[0](0), hi0 = ccw[0](0), lo1 = ccw[0](1), hi1 = ccw[0](1);
  for (const auto& v : ccw) {
    lo0 = std::min(lo0, v(0));
    hi0 = std::max(hi0, v(0));
    lo1 = std::min(lo1, v(1));
    hi1 = std::max(hi1, v(1));
  }
  Vec best = ccw[0];
  double bd = (best - y).squaredNorm();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Vec x(2);
      x << lo0 + (hi0 - lo0) * i / (n - 1), lo1 + (hi1 - lo1) * j / (n - 1);
      if (!in_ring(ccw, x, 1e-12)) continue;
      const double d = (x - y).squaredNorm();
      if (d < bd) {
        bd = d;
        best = x;
      }
    }
  // Refine along the boundary: edges are where the nearest point usually sits.
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    const Vec& a = ccw[i];
    const Vec& b = ccw[(i + 1) % ccw.size()];
    const double t = std::clamp((y - a).dot(b - a) / (b - a).squaredNorm(), 0.0, 1.0);
    const Vec x = a + t * (b - a);
    const double d = (x - y).squaredNorm();
    if (d < bd) {
      bd = d;
      best = x;
    }
  }
  return best;
}

// Random bounded 2D H-polytope: m tangent lines of a random-radius circle
// around a random centre.
inline void random_hpoly_2d(std::mt19937_64& rng, int m, Mat& H, Vec& g, double spread = 1.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  H.resize(m, 2);
  g.resize(m);
  const double cx = spread * (2 * u(rng) - 1), cy = spread * (2 * u(rng) - 1);
  for (int k = 0; k < m; ++k) {
    const double th = 2.0 * 3.14159265358979323846 * (k + 0.8 * u(rng)) / m;
    H(k, 0) = std::cos(th);
    H(k, 1) = std::sin(th);
    g(k) = H(k, 0) * cx + H(k, 1) * cy + 0.5 + 1.5 * u(rng);
  }
}

inline std::vector<Vec> random_points_2d(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  std::vector<Vec> pts;
  for (int i = 0; i < n; ++i) {
    Vec x(2);
    x << nd(rng), nd(rng);
    pts.push_back(x);
  }
  return pts;
}

// Partial sum of the geometric series sum_{i<terms} a^i W for W = [-w, w]^2,
// a scalar contraction: the box [-w s, w s]^2 with s = sum a^i.
inline double geometric_box_halfwidth(double a, double w, int terms) {
  double s = 0.0, p = 1.0;
  for (int i = 0; i < terms; ++i) {
    s += p;
    p *= a;
  }
  return w * s;
}

}  // namespace oracle
