#include "atmpc/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace atmpc {

namespace {

Polytope capped(const Polytope& p, const SynthesisOptions& opt) {
  return cap_complexity(p, opt.max_facets, std::numeric_limits<int>::max(), opt.facet_template);
}

double min_eig(const Mat& M) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Drops facets of p one at a time, each time the one whose removal grows the
// area least, until at most max_vertices remain.  Planar sets only.
Polytope drop_facets(const Polytope& p, int max_vertices) {
  HPolytope h = p.hrep();
  Polytope cur = p;
  while (cur.num_vertices() > max_vertices) {
    int best = -1;
    double best_vol = std::numeric_limits<double>::infinity();
    Polytope best_poly;
    for (int k = 0; k < h.size(); ++k) {
      Mat H(h.size() - 1, h.normals.cols());
      Vec g(h.size() - 1);
      for (int r = 0, w = 0; r < h.size(); ++r) {
        if (r == k) continue;
        H.row(w) = h.normals.row(r);
        g(w++) = h.offsets(r);
      }
      try {
        Polytope cand = Polytope::from_hrep(H, g);
        const double vol = volume(cand);
        if (vol < best_vol) {
          best_vol = vol;
          best = k;
          best_poly = cand;
        }
      } catch (const GeometryError&) {
        // unbounded without this facet
      }
    }
    if (best < 0) break;
    cur = best_poly;
    h = cur.hrep();
  }
  return cur;
}

// Raises the offsets of p (fixed normals) until A_cl p + W fits inside in
// every normal direction, or the iteration budget runs out.
Polytope template_fixed_point(const Mat& A_cl, const Polytope& p, const Polytope& W, int max_iter = 200) {
  const Mat H = p.hrep().normals;
  Vec g = p.hrep().offsets;
  Vec w(H.rows());
  for (int k = 0; k < H.rows(); ++k) w(k) = support(W, H.row(k).transpose());
  Polytope cur = p;
  for (int it = 0; it < max_iter; ++it) {
    const Polytope image = affine_image(A_cl, Vec::Zero(A_cl.rows()), cur);
    Vec next = g;
    double grow = 0.0;
    for (int k = 0; k < H.rows(); ++k) {
      const double t = support(image, H.row(k).transpose()) + w(k);
      if (t > g(k)) {
        grow = std::max(grow, t - g(k));
        next(k) = t;
      }
    }
    if (grow <= 0.0) break;
    g = next;
    cur = Polytope::from_hrep(H, g);
  }
  return cur;
}

}  // namespace

Polytope lumped_disturbance_set(const std::vector<Mat>& phi_A, const std::vector<Mat>& phi_B, const Polytope& X,
                                const Polytope& U, const Polytope& D, const SynthesisOptions& opt) {
  const Polytope w = minkowski_sum(minkowski_sum(matrix_set_product(phi_A, X), matrix_set_product(phi_B, U)), D);
  return capped(w, opt);
}

std::vector<Polytope> reach_sets(const std::vector<Mat>& psi_A, const std::vector<Mat>& psi_B, const Vec& x_t,
                                 const Polytope& X, const Polytope& U, const Polytope& D, int N,
                                 const SynthesisOptions& opt) {
  std::vector<Polytope> out;
  out.push_back(Polytope::point(x_t));
  const Polytope input_part = minkowski_sum(matrix_set_product(psi_B, U), D);
  for (int i = 0; i + 1 < N; ++i) {
    const Polytope next = minkowski_sum(matrix_set_product(psi_A, out.back()), input_part);
    out.push_back(capped(intersect(capped(next, opt), X), opt));
  }
  return out;
}

std::vector<Polytope> stepwise_disturbance_sets(const std::vector<Mat>& phi_A, const std::vector<Mat>& phi_B,
                                                const std::vector<Polytope>& X_reach, const Polytope& U,
                                                const Polytope& D, const Polytope* W_global,
                                                const SynthesisOptions& opt) {
  const Polytope input_part = minkowski_sum(matrix_set_product(phi_B, U), D);
  std::vector<Polytope> out;
  for (const auto& xr : X_reach) {
    Polytope w = capped(minkowski_sum(matrix_set_product(phi_A, xr), input_part), opt);
    if (W_global && !contains_set(w, *W_global, 0.0)) w = intersect(w, *W_global);
    out.push_back(w);
  }
  return out;
}

DisturbanceSets disturbance_sets(const std::vector<Mat>& psi_A, const std::vector<Mat>& psi_B,
                                 const std::vector<Mat>& phi_A, const std::vector<Mat>& phi_B, const Vec& x_t,
                                 const Polytope& X, const Polytope& U, const Polytope& D, int N,
                                 const SynthesisOptions& opt) {
  DisturbanceSets ds;
  ds.W_global = lumped_disturbance_set(phi_A, phi_B, X, U, D, opt);
  ds.X_reach = reach_sets(psi_A, psi_B, x_t, X, U, D, N, opt);
  ds.W_step = stepwise_disturbance_sets(phi_A, phi_B, ds.X_reach, U, D, &ds.W_global, opt);
  return ds;
}

double rpi_violation(const Mat& A_cl, const Polytope& S, const Polytope& W) {
  const HPolytope& h = S.hrep();
  const Polytope image = affine_image(A_cl, Vec::Zero(A_cl.rows()), S);
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < h.size(); ++k) {
    const Vec n = h.normals.row(k).transpose();
    worst = std::max(worst, support(image, n) + support(W, n) - h.offsets(k));
  }
  return worst;
}

TubeShape tube_shape(const Mat& A, const Mat& B, const Mat& K, const Polytope& W, const SynthesisOptions& opt) {
  const Mat A_cl = A + B * K;
  const int n = static_cast<int>(A.rows());
  TubeShape shape;
  if (W.affine_dim() == 0 && W.vertices()[0].norm() <= kGeomTol) {
    // No disturbance: the tube collapses to its centre trajectory.
    shape.S = Polytope::point(Vec::Zero(n));
    shape.s_steps = 0;
    return shape;
  }
  const HPolytope& hw = W.hrep();
  if (!W.is_full_dimensional() || hw.offsets.minCoeff() <= 0.0)
    throw SynthesisError(SynthesisError::Kind::NoContraction, "tube_shape: W must contain the origin in its interior");

  Mat power = Mat::Identity(n, n);
  std::vector<Mat> powers;  // A_cl^0 .. A_cl^{s-1}
  for (int s = 1; s <= opt.s_max; ++s) {
    powers.push_back(power);
    power = A_cl * power;
    const Polytope image = affine_image(power, Vec::Zero(n), W);
    double rho = 0.0;
    for (int k = 0; k < hw.size(); ++k) rho = std::max(rho, support(image, hw.normals.row(k).transpose()) / hw.offsets(k));
    if (rho <= opt.rho_max) {
      shape.s_steps = s;
      shape.rho = rho;
      break;
    }
  }
  if (shape.s_steps == 0)
    throw SynthesisError(SynthesisError::Kind::NoContraction,
                         "tube_shape: no contraction within s_max steps (closed loop not contractive enough)");

  Polytope F = W;
  for (std::size_t i = 1; i < powers.size(); ++i)
    F = minkowski_sum(F, affine_image(powers[i], Vec::Zero(n), W));
  Polytope S = scale(1.0 / (1.0 - shape.rho), F);
  if (S.num_vertices() > opt.max_shape_vertices || S.num_facets() > opt.max_facets) {
    S = S.dim() == 2 ? drop_facets(S, opt.max_shape_vertices) : outer_approximation(S, opt.shape_template);
    S = template_fixed_point(A_cl, S, W);
    const Polytope base = S;
    for (int step = 0; step <= opt.shape_growth_steps; ++step) {
      const double factor = 1.0 + 0.01 * step;
      S = scale(factor, base);
      shape.inflation = factor;
      if (rpi_violation(A_cl, S, W) <= 0.0) break;
    }
  }
  shape.S = S;
  return shape;
}

TerminalSet terminal_set(const Mat& A, const Mat& B, const Mat& K, const Polytope& X, const Polytope& U,
                         const Polytope& W, const SynthesisOptions& opt) {
  const Mat A_cl = A + B * K;
  const HPolytope& hx = X.hrep();
  const HPolytope& hu = U.hrep();
  Mat H0(hx.size() + hu.size(), A.cols());
  Vec g0(H0.rows());
  H0 << hx.normals, hu.normals * K;
  g0 << hx.offsets, hu.offsets;
  Polytope omega = Polytope::from_hrep(H0, g0);
  auto not_full = [](const Polytope& p) {
    return p.is_empty() || !p.is_full_dimensional() || chebyshev_center(p).radius <= kGeomTol;
  };
  if (not_full(omega))
    throw SynthesisError(SynthesisError::Kind::NotFullDim, "terminal_set: admissible set is not full-dimensional");

  for (int k = 1; k <= opt.terminal_max_iter; ++k) {
    const HPolytope& h = omega.hrep();
    Vec tightened = h.offsets;
    for (int r = 0; r < h.size(); ++r) tightened(r) -= support(W, h.normals.row(r).transpose());
    Mat H(2 * h.size(), A.cols());
    Vec g(2 * h.size());
    H << h.normals, h.normals * A_cl;
    g << h.offsets, tightened;
    const Polytope next = Polytope::from_hrep(H, g);
    if (not_full(next))
      throw SynthesisError(SynthesisError::Kind::NotFullDim,
                           "terminal_set: tightening empties the set (disturbance too large for this gain)");
    if (contains_set(omega, next, 1e-8)) return {next, k};
    omega = next;
  }
  throw SynthesisError(SynthesisError::Kind::NoConvergence, "terminal_set: no fixed point within the iteration cap");
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Accept: return "accept";
    case Verdict::RejectA: return "reject_a";
    case Verdict::RejectB: return "reject_b";
    case Verdict::RejectC: return "reject_c";
  }
  return "unknown";
}

CriterionResult check_criterion(const GainPair& prev, const GainPair& cand, const Mat& A, const Mat& B, const Mat& Q,
                                const Mat& R, bool terminal_ok, double tol) {
  CriterionResult res;
  res.min_eig_a = min_eig(lyapunov_residual(cand.P, cand.P, A, B, cand.K, cand.K, Q, R));
  res.min_eig_b = min_eig(lyapunov_residual(prev.P, cand.P, A, B, cand.K, prev.K, Q, R));
  const bool positive = min_eig(cand.P) > 1e-10;
  if (!positive || res.min_eig_a < -tol)
    res.verdict = Verdict::RejectA;
  else if (res.min_eig_b < -tol)
    res.verdict = Verdict::RejectB;
  else if (!terminal_ok)
    res.verdict = Verdict::RejectC;
  return res;
}

}  // namespace atmpc
