#include <algorithm>
#include <cmath>
#include <limits>

#include "atmpc/mpc.hpp"

namespace atmpc {

namespace {

bool is_point(const Polytope& S) { return S.affine_dim() == 0; }

void check_dims(const COCPData& d) {
  const int n = d.n(), m = d.m();
  auto bad = [](const char* what) { throw CocpError(CocpError::Kind::DimensionMismatch, what); };
  if (d.A_hat.cols() != n || d.B_hat.rows() != n) bad("build_cocp: A_hat/B_hat not conformal");
  if (d.gains.K.rows() != m || d.gains.K.cols() != n) bad("build_cocp: K has the wrong shape");
  if (d.gains.P.rows() != n || d.Q.rows() != n || d.R.rows() != m) bad("build_cocp: weights have the wrong size");
  if (d.X.dim() != n || d.U.dim() != m || d.shape.S.dim() != n || d.terminal.X_TS.dim() != n)
    bad("build_cocp: set dimensions do not match the model");
  if (d.N < 1 || static_cast<int>(d.dist.W_step.size()) != d.N) bad("build_cocp: need one W_step per stage");
  if (d.enforce_reach_inclusion && static_cast<int>(d.dist.X_reach.size()) != d.N)
    bad("build_cocp: need one reach set per stage");
}

// Dense row builder for A z <= b (or = b).
struct Rows {
  int cols;
  std::vector<Vec> a;
  std::vector<double> b;
  Vec& add(double rhs) {
    a.push_back(Vec::Zero(cols));
    b.push_back(rhs);
    return a.back();
  }
  void to(Mat& A, Vec& B) const {
    A.resize(static_cast<Eigen::Index>(a.size()), cols);
    B.resize(static_cast<Eigen::Index>(b.size()));
    for (std::size_t r = 0; r < a.size(); ++r) {
      A.row(static_cast<Eigen::Index>(r)) = a[r].transpose();
      B(static_cast<Eigen::Index>(r)) = b[r];
    }
  }
};

// Facet rows h'alpha_i + supp_S(h) beta_i <= g for every facet of P.
void add_section_in(Rows& rows, const CocpLayout& L, int i, const Polytope& P, const Polytope& S) {
  const HPolytope& h = P.hrep();
  for (int k = 0; k < h.size(); ++k) {
    const Vec hk = h.normals.row(k).transpose();
    Vec& r = rows.add(h.offsets(k));
    r.segment(L.alpha(i), L.n) = hk;
    r(L.beta(i)) = support(S, hk);
  }
}

double max_violation(const Polytope& P, const std::vector<Vec>& pts) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& p : pts) worst = std::max(worst, point_violation(P, p));
  return worst;
}

std::vector<Vec> mapped(const Mat& K, const std::vector<Vec>& pts) {
  std::vector<Vec> out;
  for (const auto& p : pts) out.push_back(K * p);
  return out;
}

bool same_vertices(const Polytope& a, const Polytope& b) {
  if (a.num_vertices() != b.num_vertices()) return false;
  for (int j = 0; j < a.num_vertices(); ++j)
    if ((a.vertices()[j] - b.vertices()[j]).norm() > 1e-12) return false;
  return true;
}

Vec combine(const BarycentricWeights& w, const std::vector<Vec>& inputs) {
  Vec u = Vec::Zero(inputs.front().size());
  for (std::size_t l = 0; l < inputs.size(); ++l) u += w.weights(static_cast<Eigen::Index>(l)) * inputs[l];
  return u;
}

}  // namespace

std::vector<Vec> TubeDecision::section_vertices(int i, const Polytope& S) const {
  std::vector<Vec> out;
  for (const auto& s : S.vertices()) out.push_back(alpha[i] + beta[i] * s);
  return out;
}

Polytope TubeDecision::section(int i, const Polytope& S) const {
  return affine_image(std::max(beta[i], 0.0) * Mat::Identity(S.dim(), S.dim()), alpha[i], S);
}

CocpLayout cocp_layout(const COCPData& d) { return {d.n(), d.m(), d.N, d.M()}; }

QPProblem build_cocp(const Vec& x_t, const COCPData& d) {
  check_dims(d);
  if (x_t.size() != d.n()) throw CocpError(CocpError::Kind::DimensionMismatch, "build_cocp: state has the wrong size");
  const CocpLayout L = cocp_layout(d);
  const Polytope& S = d.shape.S;
  const std::vector<Vec>& sv = S.vertices();
  const int nz = L.size();

  QPProblem qp;
  qp.H = Mat::Zero(nz, nz);
  qp.f = Vec::Zero(nz);
  for (int i = 0; i <= L.N; ++i) {
    const Mat& Wt = i < L.N ? d.Q : d.gains.P;
    Vec sbar = Vec::Zero(L.n);
    double sq = 0.0;
    for (const auto& s : sv) {
      sbar += s;
      sq += s.dot(Wt * s);
    }
    qp.H.block(L.alpha(i), L.alpha(i), L.n, L.n) += 2.0 * L.M * Wt;
    qp.H.block(L.alpha(i), L.beta(i), L.n, 1) += 2.0 * Wt * sbar;
    qp.H.block(L.beta(i), L.alpha(i), 1, L.n) += 2.0 * (Wt * sbar).transpose();
    qp.H(L.beta(i), L.beta(i)) += 2.0 * sq;
  }
  for (int i = 0; i < L.N; ++i)
    for (int j = 0; j < L.M; ++j) qp.H.block(L.v(i, j), L.v(i, j), L.m, L.m) += 2.0 * d.R;

  Rows eq{nz, {}, {}};
  Rows in{nz, {}, {}};
  for (int r = 0; r < L.n; ++r) eq.add(x_t(r))(L.alpha(0) + r) = 1.0;
  eq.add(0.0)(L.beta(0)) = 1.0;
  const bool point_shape = is_point(S);
  for (int i = 1; i <= L.N; ++i) {
    if (point_shape)
      eq.add(0.0)(L.beta(i)) = 1.0;  // beta has no effect on a point shape
    else
      in.add(0.0)(L.beta(i)) = -1.0;
  }

  for (int i = 0; i < L.N; ++i) add_section_in(in, L, i, d.X, S);
  if (d.enforce_reach_inclusion)
    for (int i = 1; i < L.N; ++i) add_section_in(in, L, i, d.dist.X_reach[i], S);
  const HPolytope& hu = d.U.hrep();
  for (int i = 0; i < L.N; ++i)
    for (int j = 0; j < L.M; ++j)
      for (int k = 0; k < hu.size(); ++k) in.add(hu.offsets(k)).segment(L.v(i, j), L.m) = hu.normals.row(k).transpose();
  add_section_in(in, L, L.N, d.terminal.X_TS, S);

  // Dynamics: A_hat z_i^j + B_hat v_i^j + W_step[i] inside alpha_{i+1} + beta_{i+1} S.
  const HPolytope& hs = S.hrep();
  for (int i = 0; i < L.N; ++i) {
    const Polytope& W = d.dist.W_step[i];
    if (point_shape) {
      if (W.affine_dim() != 0)
        throw CocpError(CocpError::Kind::DimensionMismatch, "build_cocp: point tube shape needs a point disturbance set");
      const Vec w = W.vertices()[0];
      for (int r = 0; r < L.n; ++r) {
        Vec& row = eq.add(-w(r));
        row.segment(L.alpha(i), L.n) = d.A_hat.row(r).transpose();
        row.segment(L.v(i, 0), L.m) = d.B_hat.row(r).transpose();
        row(L.alpha(i + 1) + r) -= 1.0;
      }
      continue;
    }
    for (int k = 0; k < hs.size(); ++k) {
      const Vec hk = hs.normals.row(k).transpose();
      const Vec hA = d.A_hat.transpose() * hk;
      const Vec hB = d.B_hat.transpose() * hk;
      const double rhs = -support(W, hk);
      for (int j = 0; j < L.M; ++j) {
        Vec& row = in.add(rhs);
        row.segment(L.alpha(i), L.n) = hA;
        row(L.beta(i)) = hA.dot(sv[j]);
        row.segment(L.v(i, j), L.m) = hB;
        row.segment(L.alpha(i + 1), L.n) -= hk;
        row(L.beta(i + 1)) -= hs.offsets(k);
      }
    }
  }
  eq.to(qp.A_eq, qp.b_eq);
  in.to(qp.A_ineq, qp.b_ineq);
  return qp;
}

TubeDecision decode_tube(const Vec& z, const COCPData& d) {
  const CocpLayout L = cocp_layout(d);
  TubeDecision t;
  for (int i = 0; i <= L.N; ++i) {
    t.alpha.push_back(z.segment(L.alpha(i), L.n));
    t.beta.push_back(z(L.beta(i)));
  }
  t.v.assign(L.N, {});
  for (int i = 0; i < L.N; ++i)
    for (int j = 0; j < L.M; ++j) t.v[i].push_back(z.segment(L.v(i, j), L.m));
  return t;
}

Vec encode_tube(const TubeDecision& tube, const COCPData& d) {
  const CocpLayout L = cocp_layout(d);
  Vec z(L.size());
  for (int i = 0; i <= L.N; ++i) {
    z.segment(L.alpha(i), L.n) = tube.alpha[i];
    z(L.beta(i)) = tube.beta[i];
  }
  for (int i = 0; i < L.N; ++i)
    for (int j = 0; j < L.M; ++j) z.segment(L.v(i, j), L.m) = tube.v[i][j];
  return z;
}

double tube_cost(const TubeDecision& tube, const COCPData& d) {
  const Polytope& S = d.shape.S;
  double J = 0.0;
  for (int i = 0; i < d.N; ++i) {
    const auto z = tube.section_vertices(i, S);
    for (std::size_t j = 0; j < z.size(); ++j) J += stage_cost(z[j], tube.v[i][j], d.Q, d.R);
  }
  for (const auto& z : tube.section_vertices(d.N, S)) J += z.dot(d.gains.P * z);
  return J;
}

double section_violation(const Vec& x, const TubeDecision& tube, int i, const Polytope& S) {
  const HPolytope& h = S.hrep();
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < h.size(); ++k)
    worst = std::max(worst, h.normals.row(k).dot(x - tube.alpha[i]) - tube.beta[i] * h.offsets(k));
  return worst;
}

double constraint_residual(const TubeDecision& tube, const Vec& x_t, const COCPData& d) {
  const Polytope& S = d.shape.S;
  const HPolytope& hs = S.hrep();
  double r = (tube.alpha[0] - x_t).cwiseAbs().maxCoeff();
  r = std::max(r, std::abs(tube.beta[0]));
  for (int i = 1; i <= d.N; ++i) r = std::max(r, -tube.beta[i]);
  for (int i = 0; i < d.N; ++i) {
    const auto z = tube.section_vertices(i, S);
    r = std::max(r, max_violation(d.X, z));
    if (d.enforce_reach_inclusion && i > 0) r = std::max(r, max_violation(d.dist.X_reach[i], z));
    r = std::max(r, max_violation(d.U, tube.v[i]));
    for (std::size_t j = 0; j < z.size(); ++j) {
      const Vec y = d.A_hat * z[j] + d.B_hat * tube.v[i][j];
      for (int k = 0; k < hs.size(); ++k) {
        const Vec hk = hs.normals.row(k).transpose();
        r = std::max(r, hk.dot(y - tube.alpha[i + 1]) + support(d.dist.W_step[i], hk) -
                            tube.beta[i + 1] * hs.offsets(k));
      }
    }
  }
  r = std::max(r, max_violation(d.terminal.X_TS, tube.section_vertices(d.N, S)));
  return r;
}

COCPResult solve_cocp(const Vec& x_t, const COCPData& d) {
  if (x_t.size() != d.n()) throw CocpError(CocpError::Kind::DimensionMismatch, "solve_cocp: state has the wrong size");
  if (!contains_point(d.X, x_t, 0.0))
    throw CocpError(CocpError::Kind::StateOutsideX, "solve_cocp: measured state violates the state constraints");
  const QPProblem qp = build_cocp(x_t, d);
  const SolveOutcome s = solve_qp(qp);
  COCPResult res;
  res.status = s.status;
  res.iterations = s.iterations;
  res.kkt_residual = s.kkt_residual;
  if (!s.optimal()) return res;
  res.tube = decode_tube(s.x, d);
  res.cost = tube_cost(res.tube, d);
  res.residual = constraint_residual(res.tube, x_t, d);
  return res;
}

Vec section_input(const Vec& x, const TubeDecision& tube, int i, const Polytope& S) {
  const BarycentricWeights w = barycentric_coordinates(x, tube.section_vertices(i, S));
  return combine(w, tube.v[i]);
}

Vec control_input(const Vec& x_t, const TubeDecision& tube, const TubeShape& shape) {
  return section_input(x_t, tube, 0, shape.S);
}

TubeDecision shifted_candidate(const TubeDecision& prev, const COCPData& data_prev, const COCPData& data_next,
                               const Vec& x_next) {
  const int N = prev.horizon();
  const Polytope& S_old = data_prev.shape.S;
  const Polytope& S_new = data_next.shape.S;
  const Mat& K = data_prev.gains.K;
  const Mat A_cl = data_prev.A_cl();
  const bool same_shape = same_vertices(S_old, S_new);
  const int M_new = S_new.num_vertices();

  TubeDecision c;
  c.alpha.resize(N + 1);
  c.beta.resize(N + 1);
  c.v.assign(N, {});

  c.alpha[0] = x_next;
  c.beta[0] = 0.0;
  const auto first = prev.section_vertices(1, S_old);
  const Vec u0 = combine(barycentric_coordinates(x_next, first), N > 1 ? prev.v[1] : mapped(K, first));
  c.v[0].assign(M_new, u0);

  for (int i = 1; i < N; ++i) {
    c.alpha[i] = prev.alpha[i + 1];
    c.beta[i] = prev.beta[i + 1];
    const auto old_vertices = prev.section_vertices(i + 1, S_old);
    const std::vector<Vec> old_inputs = i + 1 < N ? prev.v[i + 1] : mapped(K, old_vertices);
    if (same_shape) {
      c.v[i] = old_inputs;
      continue;
    }
    for (const auto& z : c.section_vertices(i, S_new))
      c.v[i].push_back(combine(barycentric_coordinates(z, old_vertices), old_inputs));
  }

  c.alpha[N] = A_cl * prev.alpha[N];
  if (is_point(S_old)) {
    c.beta[N] = 0.0;
  } else {
    const HPolytope& h = S_old.hrep();
    double b = 0.0;
    for (int k = 0; k < h.size(); ++k) {
      const Vec hk = h.normals.row(k).transpose();
      const double need =
          prev.beta[N] * support(S_old, A_cl.transpose() * hk) + support(data_prev.dist.W_global, hk);
      b = std::max(b, need / h.offsets(k));
    }
    c.beta[N] = b;
  }
  return c;
}

double stage_cost(const Vec& x, const Vec& u, const Mat& Q, const Mat& R) { return x.dot(Q * x) + u.dot(R * u); }

}  // namespace atmpc
