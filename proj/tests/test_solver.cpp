#include <random>

#include "atmpc/solver.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace atmpc;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Mat m1(double a) { return Mat::Constant(1, 1, a); }

}  // namespace

TEST_CASE("lp: bound and infeasibility basics") {
  LPProblem p;
  p.cost = v1(1.0);
  p.lower = v1(1.0);
  auto s = solve_lp(p);
  REQUIRE(s.optimal());
  CHECK(s.x(0) == doctest::Approx(1.0));

  LPProblem q;
  q.cost = v1(1.0);
  q.A_ineq.resize(2, 1);
  q.A_ineq << 1.0, -1.0;
  q.b_ineq.resize(2);
  q.b_ineq << 0.0, -1.0;
  CHECK(solve_lp(q).status == SolveStatus::Infeasible);

  LPProblem r;
  r.cost = v1(-1.0);
  CHECK(solve_lp(r).status == SolveStatus::Unbounded);
}

TEST_CASE("lp: equality constraints and free variables") {
  // min x + 2y  s.t. x + y = 3, x - y <= 1, y >= 0 with x free
  LPProblem p;
  p.cost = Vec(2);
  p.cost << 1.0, 2.0;
  p.A_eq.resize(1, 2);
  p.A_eq << 1.0, 1.0;
  p.b_eq = v1(3.0);
  p.A_ineq.resize(1, 2);
  p.A_ineq << 1.0, -1.0;
  p.b_ineq = v1(1.0);
  p.lower = Vec(2);
  p.lower << -std::numeric_limits<double>::infinity(), 0.0;
  auto s = solve_lp(p);
  REQUIRE(s.optimal());
  CHECK(s.x(0) == doctest::Approx(2.0));
  CHECK(s.x(1) == doctest::Approx(1.0));
  CHECK(s.objective == doctest::Approx(4.0));
  CHECK(s.kkt_residual <= 1e-7);
}

TEST_CASE("lp: duality gap on random problems") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 5, m = 3 * n;
    LPProblem p;
    p.cost = Vec(n);
    for (int j = 0; j < n; ++j) p.cost(j) = nd(rng);
    // Box rows keep the problem bounded; a random interior point keeps it feasible.
    p.A_ineq.resize(m + 2 * n, n);
    p.b_ineq.resize(m + 2 * n);
    Vec x0(n);
    for (int j = 0; j < n; ++j) x0(j) = 0.3 * nd(rng);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) p.A_ineq(i, j) = nd(rng);
      p.b_ineq(i) = p.A_ineq.row(i).dot(x0) + std::abs(nd(rng));
    }
    p.A_ineq.bottomRows(2 * n).setZero();
    for (int j = 0; j < n; ++j) {
      p.A_ineq(m + 2 * j, j) = 1.0;
      p.A_ineq(m + 2 * j + 1, j) = -1.0;
      p.b_ineq(m + 2 * j) = 5.0;
      p.b_ineq(m + 2 * j + 1) = 5.0;
    }
    auto s = solve_lp(p);
    REQUIRE(s.optimal());
    CHECK(s.kkt_residual <= 1e-7);
    CHECK(s.dual_ineq.minCoeff() >= -1e-9);
    const double dual_obj = -p.b_ineq.dot(s.dual_ineq);
    CHECK(std::abs(s.objective - dual_obj) <= 1e-7 * (1.0 + std::abs(s.objective)));
    CHECK((p.cost + p.A_ineq.transpose() * s.dual_ineq).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("lp: deterministic") {
  LPProblem p;
  p.cost = Vec::Ones(3);
  p.A_ineq = -Mat::Identity(3, 3);
  p.b_ineq = -Vec::Ones(3);
  auto a = solve_lp(p);
  auto b = solve_lp(p);
  CHECK(a.x == b.x);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("qp: trivial examples") {
  QPProblem p;
  p.H = m1(2.0);
  p.f = v1(0.0);
  p.lower = v1(1.0);
  auto s = solve_qp(p);
  REQUIRE(s.optimal());
  CHECK(s.x(0) == doctest::Approx(1.0));
  CHECK(s.objective == doctest::Approx(1.0));

  QPProblem q;
  Vec a(3);
  a << 1.0, -2.0, 0.5;
  q.H = 2.0 * Mat::Identity(3, 3);
  q.f = -2.0 * a;
  auto t = solve_qp(q);
  REQUIRE(t.optimal());
  CHECK((t.x - a).norm() <= 1e-10);
}

TEST_CASE("qp: infeasible and non-symmetric") {
  QPProblem p;
  p.H = m1(1.0);
  p.f = v1(0.0);
  p.lower = v1(1.0);
  p.upper = v1(0.0);
  CHECK(solve_qp(p).status == SolveStatus::Infeasible);

  QPProblem q;
  q.H = Mat::Identity(2, 2);
  q.H(0, 1) = 1.0;
  q.f = Vec::Zero(2);
  CHECK_THROWS_AS(solve_qp(q), SolverError);
}

TEST_CASE("qp: agrees with exhaustive active-set enumeration") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 10, m = 8;
    Mat L(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) L(i, j) = nd(rng);
    const Mat H = L * L.transpose() + 0.5 * Mat::Identity(n, n);
    Vec f(n);
    for (int i = 0; i < n; ++i) f(i) = 3.0 * nd(rng);
    Mat A(m, n);
    Vec b(m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) A(i, j) = nd(rng);
      b(i) = std::abs(nd(rng));
    }
    const auto ref = oracle::qp_exhaustive(H, f, A, b);
    REQUIRE(ref.feasible);
    QPProblem p{H, f, A, b, {}, {}, {}, {}};
    const auto s = solve_qp(p);
    REQUIRE(s.optimal());
    CHECK(std::abs(s.objective - ref.objective) <= 1e-8 * (1.0 + std::abs(ref.objective)));
    CHECK(s.kkt_residual <= 1e-7);
  }
}

TEST_CASE("qp: singular hessian via proximal iteration") {
  // min x0 + x1^2 s.t. x0 >= -1, x1 >= 1 (H singular in x0)
  QPProblem p;
  p.H = Mat::Zero(2, 2);
  p.H(1, 1) = 2.0;
  p.f = Vec(2);
  p.f << 1.0, 0.0;
  p.lower = Vec(2);
  p.lower << -1.0, 1.0;
  auto s = solve_qp(p);
  REQUIRE(s.optimal());
  CHECK(s.x(0) == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(s.x(1) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s.kkt_residual <= 1e-7);
}

TEST_CASE("qp: dependent equalities are tolerated") {
  QPProblem p;
  p.H = Mat::Identity(3, 3);
  p.f = Vec::Zero(3);
  p.A_eq.resize(3, 3);
  p.A_eq << 1, 1, 1, 2, 2, 2, 1, -1, 0;
  p.b_eq.resize(3);
  p.b_eq << 1, 2, 0;
  auto s = solve_qp(p);
  REQUIRE(s.optimal());
  CHECK((p.A_eq * s.x - p.b_eq).norm() <= 1e-9);

  p.b_eq(1) = 3.0;
  CHECK(solve_qp(p).status == SolveStatus::Infeasible);
}

TEST_CASE("qp: optimum beats random feasible points") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 4, m = 6;
    Mat L(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) L(i, j) = nd(rng);
    const Mat H = L * L.transpose();
    Vec f(n);
    for (int i = 0; i < n; ++i) f(i) = nd(rng);
    Mat A(m, n);
    Vec b(m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) A(i, j) = nd(rng);
      b(i) = 1.0 + std::abs(nd(rng));
    }
    QPProblem p{H, f, A, b, {}, {}, Vec::Constant(n, -2.0), Vec::Constant(n, 2.0)};
    const auto s = solve_qp(p);
    REQUIRE(s.optimal());
    int checked = 0;
    while (checked < 100) {
      Vec x(n);
      for (int i = 0; i < n; ++i) x(i) = 2.0 * ud(rng);
      if ((A * x - b).maxCoeff() > 0.0) continue;
      ++checked;
      CHECK(s.objective <= 0.5 * x.dot(H * x) + f.dot(x) + 1e-9);
    }
  }
}

TEST_CASE("riccati: scalar deadbeat and example system") {
  auto g = synthesize_gain(m1(0.0), m1(1.0), m1(1.0), m1(1.0));
  CHECK(g.P(0, 0) == doctest::Approx(1.0));
  CHECK(g.K(0, 0) == doctest::Approx(0.0));

  Mat A(2, 2), B(2, 1);
  A << 0.2, 1.015, -0.2825, 1.0;
  B << 1.08, 3.0;
  const Mat Q = Mat::Identity(2, 2), R = m1(0.1);
  auto gp = synthesize_gain(A, B, Q, R);
  const Mat Acl = A + B * gp.K;
  const Mat res = gp.P - Acl.transpose() * gp.P * Acl - Q - gp.K.transpose() * R * gp.K;
  CHECK(res.norm() <= 1e-6);
  CHECK(min_eig_psd_check(lyapunov_residual(gp.P, gp.P, A, B, gp.K, gp.K, Q, R), 1e-8));
  Eigen::EigenSolver<Mat> es(Acl);
  CHECK(es.eigenvalues().cwiseAbs().maxCoeff() < 1.0);
}

TEST_CASE("riccati: unstabilizable pair does not converge") {
  CHECK_THROWS_AS(synthesize_gain(m1(2.0), m1(0.0), m1(1.0), m1(1.0)), SolverError);
}

TEST_CASE("psd check") {
  CHECK(min_eig_psd_check(Mat::Identity(2, 2), 1e-8));
  CHECK_FALSE(min_eig_psd_check(-Mat::Identity(2, 2), 1e-8));
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = -1e-9;
  d(1, 1) = 1.0;
  CHECK(min_eig_psd_check(d, 1e-8));
  Mat ns = Mat::Identity(2, 2);
  ns(0, 1) = 0.5;
  CHECK_THROWS_AS(min_eig_psd_check(ns, 1e-8), SolverError);
}
