#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>

#include "atmpc/solver.hpp"

namespace atmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Constraints in the form n'x >= c (inequalities) or n'x = c (equalities),
// with unit-norm rows. origin[k] remembers the source row and its scale so
// that multipliers can be mapped back.
struct NormalizedConstraints {
  Mat N;  // n x m, one column per constraint
  Vec c;
  int num_eq = 0;
  struct Origin {
    int kind;  // 0 ineq, 1 eq, 2 lower bound, 3 upper bound
    Eigen::Index index;
    double scale;
  };
  std::vector<Origin> origin;
  bool trivially_infeasible = false;
};

NormalizedConstraints normalize(const QPProblem& p, double tol) {
  const Eigen::Index n = p.num_vars();
  std::vector<Vec> cols;
  std::vector<double> rhs;
  NormalizedConstraints out;

  auto push = [&](const Vec& a, double b, int kind, Eigen::Index index, bool equality) {
    const double nrm = a.norm();
    if (nrm < 1e-14) {
      if (equality ? std::abs(b) > tol : b < -tol) out.trivially_infeasible = true;
      return;
    }
    cols.push_back(a / nrm);
    rhs.push_back(b / nrm);
    out.origin.push_back({kind, index, nrm});
  };

  // Equalities first: a'x = b.
  for (Eigen::Index i = 0; i < p.A_eq.rows(); ++i) push(p.A_eq.row(i).transpose(), p.b_eq(i), 1, i, true);
  out.num_eq = static_cast<int>(cols.size());
  // a'x <= b  ->  -a'x >= -b.
  for (Eigen::Index i = 0; i < p.A_ineq.rows(); ++i)
    push(-p.A_ineq.row(i).transpose(), -p.b_ineq(i), 0, i, false);
  for (Eigen::Index j = 0; j < p.lower.size(); ++j) {
    if (!std::isfinite(p.lower(j))) continue;
    Vec e = Vec::Zero(n);
    e(j) = 1.0;
    push(e, p.lower(j), 2, j, false);
  }
  for (Eigen::Index j = 0; j < p.upper.size(); ++j) {
    if (!std::isfinite(p.upper(j))) continue;
    Vec e = Vec::Zero(n);
    e(j) = -1.0;
    push(e, -p.upper(j), 3, j, false);
  }
  out.N.resize(n, static_cast<Eigen::Index>(cols.size()));
  out.c.resize(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    out.N.col(static_cast<Eigen::Index>(k)) = cols[k];
    out.c(static_cast<Eigen::Index>(k)) = rhs[k];
  }
  return out;
}

struct GIResult {
  SolveStatus status = SolveStatus::MaxIter;
  Vec x;
  Vec u;  // multiplier per normalized constraint (0 if inactive)
  int iterations = 0;
};

// Dual active-set method for min 1/2 x'Gx + a'x with G positive definite.
class GoldfarbIdnani {
 public:
  GoldfarbIdnani(const Mat& G, const Vec& a, const NormalizedConstraints& C, double tol)
      : G_(G), a_(a), C_(C), n_(G.rows()), m_(C.N.cols()), tol_(tol) {}

  GIResult solve(int max_iterations) {
    GIResult res;
    Eigen::LLT<Mat> llt(G_);
    // J = L^{-T}
    const Mat L = llt.matrixL();
    J_ = L.triangularView<Eigen::Lower>().solve(Mat::Identity(n_, n_)).transpose();
    R_ = Mat::Zero(n_, n_);
    r_norm_ = 1.0;
    iq_ = 0;
    active_.clear();
    u_.clear();
    x_ = -llt.solve(a_);

    std::vector<char> in_active(static_cast<std::size_t>(m_), 0);
    Vec d(n_), z(n_), r(n_);

    // Equalities.
    for (int k = 0; k < C_.num_eq; ++k) {
      const Vec np = C_.N.col(k);
      compute_directions(np, d, z, r);
      const double znp = z.dot(np);
      const double viol = C_.c(k) - np.dot(x_);
      if (std::abs(znp) <= 1e-12) {
        // Linearly dependent on earlier equalities: either redundant or inconsistent.
        if (std::abs(viol) > 1e3 * tol_) {
          res.status = SolveStatus::Infeasible;
          return res;
        }
        continue;
      }
      const double t = viol / znp;
      x_ += t * z;
      for (int i = 0; i < iq_; ++i) u_[i] -= t * r(i);
      if (!add_constraint(d)) {
        res.status = SolveStatus::Infeasible;
        return res;
      }
      active_.push_back(k);
      u_.push_back(t);
      in_active[k] = 1;
      ++res.iterations;
    }
    const int num_eq_active = iq_;

    while (true) {
      // Most violated inactive inequality.
      int p = -1;
      double worst = -tol_;
      for (Eigen::Index k = C_.num_eq; k < m_; ++k) {
        if (in_active[k]) continue;
        const double s = C_.N.col(k).dot(x_) - C_.c(k);
        if (s < worst) {
          worst = s;
          p = static_cast<int>(k);
        }
      }
      if (p < 0) break;

      const Vec np = C_.N.col(p);
      double u_plus = 0.0;
      while (true) {
        if (res.iterations++ >= max_iterations) {
          res.status = SolveStatus::MaxIter;
          return res;
        }
        compute_directions(np, d, z, r);
        // Partial (dual) step length.
        double t1 = kInf;
        int l = -1;
        for (int i = num_eq_active; i < iq_; ++i) {
          if (r(i) > 1e-14) {
            const double ratio = u_[i] / r(i);
            if (ratio < t1) {
              t1 = ratio;
              l = i;
            }
          }
        }
        // Full (primal) step length.
        const double znp = z.dot(np);
        const double s_p = np.dot(x_) - C_.c(p);
        const double t2 = (std::abs(znp) > 1e-14) ? -s_p / znp : kInf;
        const double t = std::min(t1, t2);
        if (!std::isfinite(t)) {
          res.status = SolveStatus::Infeasible;
          return res;
        }
        if (!std::isfinite(t2)) {
          // Dual step only.
          for (int i = 0; i < iq_; ++i) u_[i] -= t * r(i);
          u_plus += t;
          in_active[active_[l]] = 0;
          delete_constraint(l);
          continue;
        }
        x_ += t * z;
        for (int i = 0; i < iq_; ++i) u_[i] -= t * r(i);
        u_plus += t;
        if (t == t2) {
          if (!add_constraint(d)) {
            res.status = SolveStatus::Infeasible;
            return res;
          }
          active_.push_back(p);
          u_.push_back(u_plus);
          in_active[p] = 1;
          break;
        }
        in_active[active_[l]] = 0;
        delete_constraint(l);
      }
    }

    res.status = SolveStatus::Optimal;
    res.x = x_;
    res.u = Vec::Zero(m_);
    for (int i = 0; i < iq_; ++i) res.u(active_[i]) = u_[i];
    return res;
  }

 private:
  void compute_directions(const Vec& np, Vec& d, Vec& z, Vec& r) const {
    d = J_.transpose() * np;
    z = J_.rightCols(n_ - iq_) * d.tail(n_ - iq_);
    r.setZero();
    if (iq_ > 0)
      r.head(iq_) = R_.topLeftCorner(iq_, iq_).triangularView<Eigen::Upper>().solve(d.head(iq_));
  }

  bool add_constraint(Vec& d) {
    for (Eigen::Index j = n_ - 1; j >= iq_ + 1; --j) {
      double cc = d(j - 1);
      double ss = d(j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      d(j) = 0.0;
      ss /= h;
      cc /= h;
      if (cc < 0.0) {
        cc = -cc;
        ss = -ss;
        d(j - 1) = -h;
      } else {
        d(j - 1) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (Eigen::Index k = 0; k < n_; ++k) {
        const double t1 = J_(k, j - 1);
        const double t2 = J_(k, j);
        J_(k, j - 1) = t1 * cc + t2 * ss;
        J_(k, j) = xny * (t1 + J_(k, j - 1)) - t2;
      }
    }
    ++iq_;
    R_.col(iq_ - 1).head(iq_) = d.head(iq_);
    if (std::abs(d(iq_ - 1)) <= 1e-14 * r_norm_) {
      --iq_;
      R_.col(iq_).setZero();
      return false;
    }
    r_norm_ = std::max(r_norm_, std::abs(d(iq_ - 1)));
    return true;
  }

  void delete_constraint(int qq) {
    active_.erase(active_.begin() + qq);
    u_.erase(u_.begin() + qq);
    for (int i = qq; i < iq_ - 1; ++i) R_.col(i) = R_.col(i + 1);
    R_.col(iq_ - 1).setZero();
    --iq_;
    for (int j = qq; j < iq_; ++j) {
      double cc = R_(j, j);
      double ss = R_(j + 1, j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      cc /= h;
      ss /= h;
      R_(j + 1, j) = 0.0;
      if (cc < 0.0) {
        R_(j, j) = -h;
        cc = -cc;
        ss = -ss;
      } else {
        R_(j, j) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (int k = j + 1; k < iq_; ++k) {
        const double t1 = R_(j, k);
        const double t2 = R_(j + 1, k);
        R_(j, k) = t1 * cc + t2 * ss;
        R_(j + 1, k) = xny * (t1 + R_(j, k)) - t2;
      }
      for (Eigen::Index k = 0; k < n_; ++k) {
        const double t1 = J_(k, j);
        const double t2 = J_(k, j + 1);
        J_(k, j) = t1 * cc + t2 * ss;
        J_(k, j + 1) = xny * (J_(k, j) + t1) - t2;
      }
    }
  }

  const Mat& G_;
  const Vec& a_;
  const NormalizedConstraints& C_;
  Eigen::Index n_;
  Eigen::Index m_;
  double tol_;
  Mat J_;
  Mat R_;
  double r_norm_ = 1.0;
  int iq_ = 0;
  std::vector<int> active_;
  std::vector<double> u_;
  Vec x_;
};

void check_dimensions(const QPProblem& p) {
  const Eigen::Index n = p.num_vars();
  const bool ok = p.H.rows() == n && p.H.cols() == n && (p.A_ineq.rows() == 0 || p.A_ineq.cols() == n) &&
                  p.b_ineq.size() == p.A_ineq.rows() && (p.A_eq.rows() == 0 || p.A_eq.cols() == n) &&
                  p.b_eq.size() == p.A_eq.rows() && (p.lower.size() == 0 || p.lower.size() == n) &&
                  (p.upper.size() == 0 || p.upper.size() == n);
  if (!ok) throw SolverError(SolverError::Kind::DimensionMismatch, "solve_qp: inconsistent problem dimensions");
  if (n > 0 && (p.H - p.H.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + p.H.cwiseAbs().maxCoeff()))
    throw SolverError(SolverError::Kind::NonSymmetric, "solve_qp: H is not symmetric");
}

}  // namespace

SolveOutcome solve_qp(const QPProblem& p, int max_iterations) {
  check_dimensions(p);
  const Eigen::Index n = p.num_vars();
  SolveOutcome out;
  const double tol = 1e-10;
  const NormalizedConstraints C = normalize(p, 1e-9);
  if (C.trivially_infeasible) {
    out.status = SolveStatus::Infeasible;
    return out;
  }

  const Mat H = 0.5 * (p.H + p.H.transpose());
  const double h_scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  Eigen::LLT<Mat> probe(H);
  const bool definite = probe.info() == Eigen::Success && probe.rcond() > 1e-12;

  GIResult gi;
  if (definite) {
    GoldfarbIdnani solver(H, p.f, C, tol);
    gi = solver.solve(max_iterations);
  } else {
    // Proximal point iteration on H + rho I.
    const double rho = 1e-3 * h_scale;
    const Mat G = H + rho * Mat::Identity(n, n);
    Vec xk = Vec::Zero(n);
    int total = 0;
    bool converged = false;
    for (int outer = 0; outer < 500; ++outer) {
      const Vec a = p.f - rho * xk;
      GoldfarbIdnani solver(G, a, C, tol);
      gi = solver.solve(std::max(1, max_iterations - total));
      total += gi.iterations;
      if (gi.status != SolveStatus::Optimal) break;
      const double step = (gi.x - xk).cwiseAbs().maxCoeff();
      xk = gi.x;
      if (step <= 1e-11 * (1.0 + xk.cwiseAbs().maxCoeff())) {
        converged = true;
        break;
      }
      if (xk.cwiseAbs().maxCoeff() > 1e12) {
        gi.status = SolveStatus::Unbounded;
        break;
      }
    }
    gi.iterations = total;
    if (gi.status == SolveStatus::Optimal && !converged) gi.status = SolveStatus::MaxIter;
  }

  out.status = gi.status;
  out.iterations = gi.iterations;
  if (gi.status != SolveStatus::Optimal) return out;

  out.x = gi.x;
  out.objective = 0.5 * out.x.dot(p.H * out.x) + p.f.dot(out.x);
  out.dual_ineq = Vec::Zero(p.A_ineq.rows());
  out.dual_eq = Vec::Zero(p.A_eq.rows());
  Vec stationarity = H * out.x + p.f;
  double complementarity = 0.0;
  double dual_infeasibility = 0.0;
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(C.origin.size()); ++k) {
    const auto& o = C.origin[static_cast<std::size_t>(k)];
    const double uk = gi.u(k);
    // Internal convention: Gx + a = sum u_k n_k.
    stationarity -= uk * C.N.col(k);
    if (o.kind == 1) {
      out.dual_eq(o.index) = -uk / o.scale;
      continue;
    }
    if (o.kind == 0) out.dual_ineq(o.index) = uk / o.scale;
    dual_infeasibility = std::max(dual_infeasibility, -uk);
    const double slack = C.N.col(k).dot(out.x) - C.c(k);
    complementarity = std::max(complementarity, std::abs(uk * slack));
  }
  double primal = 0.0;
  for (Eigen::Index k = 0; k < C.N.cols(); ++k) {
    const double s = C.N.col(k).dot(out.x) - C.c(k);
    primal = std::max(primal, k < C.num_eq ? std::abs(s) : -s);
  }
  const double scale = 1.0 + p.f.cwiseAbs().maxCoeff() + h_scale * out.x.cwiseAbs().maxCoeff();
  const double cscale = 1.0 + (C.c.size() ? C.c.cwiseAbs().maxCoeff() : 0.0);
  out.kkt_residual = std::max({stationarity.cwiseAbs().maxCoeff() / scale, primal / cscale,
                               dual_infeasibility / scale, complementarity / (scale * cscale)});
  return out;
}

}  // namespace atmpc
