#include <random>

#include "atmpc/synthesis.hpp"
#include "atmpc/uncertainty.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "example_data.hpp"

using namespace atmpc;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Polytope square(double r) { return Polytope::box(Vec::Constant(2, -r), Vec::Constant(2, r)); }

bool same_set(const Polytope& a, const Polytope& b, double tol) {
  return contains_set(a, b, tol) && contains_set(b, a, tol);
}

struct ExampleSetup {
  ParamSet set = make_param_set(example::psi_vertices());
  Mat psi_hat = example::psi_mean();
  Mat A = psi_hat.leftCols(2);
  Mat B = psi_hat.rightCols(1);
  GainPair gains = synthesize_gain(A, B, example::Q(), example::R());
  ComponentVertices cv = component_vertex_sets(set, psi_hat, 2);
  DisturbanceSets ds() const {
    return disturbance_sets(cv.psi_A, cv.psi_B, cv.phi_A, cv.phi_B, example::x0(), example::X(), example::U(), example::D(), 10);
  }
};

// Every sum of one vertex product per term, hulled.
std::vector<Vec> vertex_product_hull(const std::vector<Mat>& phiA, const std::vector<Mat>& phiB, const Polytope& X,
                                     const Polytope& U, const Polytope& D) {
  std::vector<Vec> pts;
  for (const auto& a : phiA)
    for (const auto& x : X.vertices())
      for (const auto& b : phiB)
        for (const auto& u : U.vertices())
          for (const auto& d : D.vertices()) pts.push_back(a * x + b * u + d);
  return oracle::hull_2d(pts);
}

}  // namespace

TEST_CASE("lumped disturbance set") {
  const std::vector<Mat> zA{Mat::Zero(2, 2)}, zB{Mat::Zero(2, 1)};
  CHECK(same_set(lumped_disturbance_set(zA, zB, example::X(), example::U(), example::D()), example::D(), 1e-12));
  const Polytope z2 = Polytope::point(Vec::Zero(2));
  const Polytope w0 = lumped_disturbance_set(zA, zB, z2, Polytope::point(Vec::Zero(1)), z2);
  CHECK(w0.num_vertices() == 1);
  CHECK(w0.vertices()[0].norm() == 0.0);

  const ExampleSetup p;
  const Polytope W = lumped_disturbance_set(p.cv.phi_A, p.cv.phi_B, example::X(), example::U(), example::D());
  CHECK(contains_set(example::D(), W));
  CHECK(volume(W) / volume(example::D()) > 1.0);
  const auto ref = vertex_product_hull(p.cv.phi_A, p.cv.phi_B, example::X(), example::U(), example::D());
  CHECK(volume(W) == doctest::Approx(oracle::hull_area(ref)).epsilon(1e-9));
  for (const auto& v : ref) CHECK(contains_point(W, v, 1e-9));
}

TEST_CASE("reach sets") {
  const std::vector<Mat> zA{Mat::Zero(2, 2)}, zB{Mat::Zero(2, 1)};
  const auto xr = reach_sets(zA, zB, example::x0(), example::X(), example::U(), example::D(), 10);
  REQUIRE(xr.size() == 10);
  CHECK(xr[0].num_vertices() == 1);
  CHECK((xr[0].vertices()[0] - example::x0()).norm() == 0.0);
  for (int i = 1; i < 10; ++i) CHECK(same_set(xr[i], example::D(), 1e-12));

  Mat A(2, 2);
  A << 0.5, 0.2, -0.1, 0.9;
  const Polytope z2 = Polytope::point(Vec::Zero(2));
  const auto single = reach_sets({A}, {Mat::Zero(2, 1)}, example::x0(), example::X(), Polytope::point(Vec::Zero(1)), z2, 3);
  CHECK(single[1].num_vertices() == 1);
  CHECK((single[1].vertices()[0] - A * example::x0()).norm() <= 1e-12);

  SUBCASE("shrinking the parameter spread shrinks every reach set") {
    const ExampleSetup p;
    std::vector<Mat> inner;
    for (const auto& v : example::psi_vertices()) inner.push_back(p.psi_hat + 0.5 * (v - p.psi_hat));
    const ParamSet small = make_param_set(inner);
    const auto cs = component_vertex_sets(small, p.psi_hat, 2);
    const auto big = reach_sets(p.cv.psi_A, p.cv.psi_B, example::x0(), example::X(), example::U(), example::D(), 10);
    const auto shr = reach_sets(cs.psi_A, cs.psi_B, example::x0(), example::X(), example::U(), example::D(), 10);
    for (int i = 0; i < 10; ++i) CHECK(contains_set(shr[i], big[i], 1e-7));
  }
}

TEST_CASE("stepwise disturbance sets") {
  const std::vector<Mat> zA{Mat::Zero(2, 2)}, zB{Mat::Zero(2, 1)};
  const ExampleSetup p;
  const auto xr = reach_sets(p.cv.psi_A, p.cv.psi_B, example::x0(), example::X(), example::U(), example::D(), 10);
  for (const auto& w : stepwise_disturbance_sets(zA, zB, xr, example::U(), example::D()))
    CHECK(same_set(w, example::D(), 1e-12));
  const DisturbanceSets ds = p.ds();
  REQUIRE(ds.W_step.size() == 10);
  for (const auto& w : ds.W_step) CHECK(contains_set(w, ds.W_global, 1e-7));
  CHECK(volume(ds.W_step[0]) < volume(ds.W_global));
}

TEST_CASE("tube shape") {
  SUBCASE("nilpotent closed loop gives W itself") {
    const Mat A = Mat::Zero(2, 2), B = Mat::Identity(2, 2), K = Mat::Zero(2, 2);
    const TubeShape t = tube_shape(A, B, K, square(1.0));
    CHECK(t.s_steps == 1);
    CHECK(t.rho == 0.0);
    CHECK(same_set(t.S, square(1.0), 1e-12));
  }
  SUBCASE("geometric series oracle") {
    const Mat A = 0.5 * Mat::Identity(2, 2), B = Mat::Identity(2, 2), K = Mat::Zero(2, 2);
    const TubeShape t = tube_shape(A, B, K, square(1.0));
    const double mrpi = oracle::geometric_box_halfwidth(0.5, 1.0, 200);
    CHECK(mrpi == doctest::Approx(2.0));
    CHECK(contains_set(square(mrpi), t.S, 1e-9));
    CHECK(contains_set(t.S, square(mrpi / (1.0 - t.rho)), 1e-9));
    CHECK(t.rho <= 0.05);
  }
  SUBCASE("no contraction") {
    const Mat A = Mat::Identity(2, 2), B = Mat::Identity(2, 2), K = Mat::Zero(2, 2);
    CHECK_THROWS_AS(tube_shape(A, B, K, square(1.0)), SynthesisError);
  }
  SUBCASE("example system") {
    const ExampleSetup p;
    const DisturbanceSets ds = p.ds();
    const TubeShape t = tube_shape(p.A, p.B, p.gains.K, ds.W_global);
    const Mat A_cl = p.A + p.B * p.gains.K;
    CHECK(t.num_vertices() <= 12);
    CHECK(chebyshev_center(t.S).radius > 1e-9);
    CHECK(contains_point(t.S, Vec::Zero(2)));
    CHECK(contains_set(minkowski_sum(affine_image(A_cl, Vec::Zero(2), t.S), ds.W_global), t.S, 1e-7));
    Polytope partial = ds.W_global;
    Mat power = Mat::Identity(2, 2);
    for (int i = 1; i < 20; ++i) {
      power = A_cl * power;
      partial = minkowski_sum(partial, affine_image(power, Vec::Zero(2), ds.W_global));
    }
    CHECK(contains_set(partial, t.S, 1e-7));
    CHECK(contains_set(t.S, example::X(), 0.0));
  }
}

TEST_CASE("terminal set") {
  SUBCASE("deadbeat without disturbance") {
    const Mat A = Mat::Identity(2, 2), B = Mat::Identity(2, 2), K = -Mat::Identity(2, 2);
    const Polytope U = Polytope::box(Vec::Constant(2, -0.5), Vec::Constant(2, 0.5));
    const TerminalSet ts = terminal_set(A, B, K, square(1.0), U, Polytope::point(Vec::Zero(2)));
    CHECK(ts.iterations == 1);
    CHECK(same_set(ts.X_TS, square(0.5), 1e-12));
  }
  SUBCASE("disturbance too large") {
    const Mat A = 0.5 * Mat::Identity(2, 2), B = Mat::Identity(2, 2), K = Mat::Zero(2, 2);
    CHECK_THROWS_AS(terminal_set(A, B, K, square(1.0), square(1.0), square(10.0)), SynthesisError);
  }
  SUBCASE("example system") {
    const ExampleSetup p;
    const DisturbanceSets ds = p.ds();
    const TerminalSet ts = terminal_set(p.A, p.B, p.gains.K, example::X(), example::U(), ds.W_global);
    const Mat A_cl = p.A + p.B * p.gains.K;
    CHECK(contains_set(ts.X_TS, example::X(), 1e-7));
    CHECK(contains_set(affine_image(p.gains.K, Vec::Zero(1), ts.X_TS), example::U(), 1e-7));
    CHECK(contains_set(minkowski_sum(affine_image(A_cl, Vec::Zero(2), ts.X_TS), ds.W_global), ts.X_TS, 1e-7));
    CHECK(chebyshev_center(ts.X_TS).radius > 1e-9);
    CHECK(contains_point(ts.X_TS, Vec::Zero(2)));
  }
}

TEST_CASE("criterion check") {
  const ExampleSetup p;
  const Mat& Q = example::Q();
  const Mat& R = example::R();
  CHECK(check_criterion(p.gains, p.gains, p.A, p.B, Q, R, true).verdict == Verdict::Accept);
  CHECK(check_criterion(p.gains, p.gains, p.A, p.B, Q, R, false).verdict == Verdict::RejectC);
  const GainPair tiny{1e-6 * Mat::Identity(2, 2), p.gains.K};
  CHECK(check_criterion(tiny, p.gains, p.A, p.B, Q, R, true).verdict == Verdict::RejectB);
  const GainPair bad{1e-3 * Mat::Identity(2, 2), p.gains.K};
  CHECK(check_criterion(p.gains, bad, p.A, p.B, Q, R, true).verdict == Verdict::RejectA);
}

TEST_CASE("refinement monotonicity with fixed estimate and gain") {
  const ExampleSetup p;
  const DisturbanceSets big = p.ds();
  std::vector<Mat> inner;
  for (const auto& v : example::psi_vertices()) inner.push_back(p.psi_hat + 0.6 * (v - p.psi_hat));
  const ParamSet small = make_param_set(inner);
  const auto cs = component_vertex_sets(small, p.psi_hat, 2);
  const DisturbanceSets sm =
      disturbance_sets(cs.psi_A, cs.psi_B, cs.phi_A, cs.phi_B, example::x0(), example::X(), example::U(), example::D(), 10);
  CHECK(contains_set(sm.W_global, big.W_global, 1e-7));
  for (int i = 0; i < 10; ++i) {
    CHECK(contains_set(sm.W_step[i], big.W_step[i], 1e-7));
    CHECK(contains_set(sm.X_reach[i], big.X_reach[i], 1e-7));
  }
  const TerminalSet tb = terminal_set(p.A, p.B, p.gains.K, example::X(), example::U(), big.W_global);
  const TerminalSet ts = terminal_set(p.A, p.B, p.gains.K, example::X(), example::U(), sm.W_global);
  CHECK(contains_set(tb.X_TS, ts.X_TS, 1e-7));
}
