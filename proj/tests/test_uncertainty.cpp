#include <random>

#include "atmpc/uncertainty.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "example_data.hpp"

using namespace atmpc;

namespace {

Mat row(double a, double b) {
  Mat m(1, 2);
  m << a, b;
  return m;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// 1x2 parameter set whose chart coordinates equal psi - [-1 -1].
ParamSet unit_square_set() { return make_param_set({row(-1, -1), row(1, -1), row(1, 1), row(-1, 1)}); }

bool same_set(const Polytope& a, const Polytope& b, double tol) {
  return contains_set(a, b, tol) && contains_set(b, a, tol);
}

Mat random_truth(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double w0 = u(rng), w1 = u(rng), w2 = u(rng);
  const double s = w0 + w1 + w2;
  const auto v = example::psi_vertices();
  return (w0 * v[0] + w1 * v[1] + w2 * v[2]) / s;
}

}  // namespace

TEST_CASE("chart rank and orthonormality") {
  CHECK(build_chart({row(1, 2)}).rank() == 0);
  CHECK(build_chart({row(0, 0), row(1, 1), row(3, 3)}).rank() == 1);

  const auto verts = example::psi_vertices();
  const AffineChart c = build_chart(verts);
  REQUIRE(c.rank() == 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double ip = (c.basis[i].array() * c.basis[j].array()).sum();
      CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) <= 1e-12);
    }
  for (const auto& v : verts) CHECK((c.lift(c.coords(v)) - v).norm() <= 1e-10);
  CHECK(c.residual(example::psi_true()) <= 1e-10);
}

TEST_CASE("non-falsified halfspaces") {
  SUBCASE("scalar system interval contains the true parameter") {
    const AffineChart chart = build_chart({row(0.5, 1.0), row(1.5, 1.0)});
    const Polytope D = Polytope::box(Vec::Constant(1, -0.1), Vec::Constant(1, 0.1));
    const double a_true = 0.9, d = 0.07;
    const auto cuts = nonfalsified_halfspaces(Vec::Constant(1, a_true + d), Vec::Constant(1, 1.0), Vec::Zero(1), D, chart);
    const Vec c = chart.coords(row(a_true, 1.0));
    double lo = -1e9, hi = 1e9;
    for (const auto& h : cuts) {
      CHECK(h.normal.dot(c) <= h.offset + 1e-12);
      if (h.normal(0) > 0) hi = std::min(hi, h.offset / h.normal(0));
      if (h.normal(0) < 0) lo = std::max(lo, h.offset / h.normal(0));
    }
    // Interval width in the a direction is exactly 2 * 0.1.
    CHECK(hi - lo == doctest::Approx(0.2).epsilon(1e-12));
  }
  SUBCASE("zero regressor carries no information") {
    const AffineChart chart = build_chart(example::psi_vertices());
    const auto cuts = nonfalsified_halfspaces(vec2(0.05, 0.0), Vec::Zero(2), Vec::Zero(1), example::D(), chart);
    for (const auto& h : cuts) {
      CHECK(h.normal.norm() <= 1e-15);
      CHECK(h.offset >= 0.0);
    }
    const ParamSet s = make_param_set(example::psi_vertices());
    CHECK_THROWS_AS(refine_set(s, nonfalsified_halfspaces(vec2(0.5, 0.0), Vec::Zero(2), Vec::Zero(1), example::D(), chart), 16),
                    UncertaintyError);
  }
  SUBCASE("random rollouts never falsify the truth") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const AffineChart chart = build_chart(example::psi_vertices());
    for (int trial = 0; trial < 500; ++trial) {
      const Mat truth = random_truth(rng);
      const Vec x = vec2(20 * u(rng), 20 * u(rng));
      const Vec uu = Vec::Constant(1, 10 * u(rng));
      Vec g(3);
      g << x, uu;
      const Vec xn = truth * g + vec2(0.1 * u(rng), 0.1 * u(rng));
      const Vec c = chart.coords(truth);
      for (const auto& h : nonfalsified_halfspaces(xn, x, uu, example::D(), chart)) CHECK(h.normal.dot(c) <= h.offset + 1e-9);
    }
  }
}

TEST_CASE("refine_set") {
  const ParamSet sq = unit_square_set();
  SUBCASE("no cuts") { CHECK(same_set(refine_set(sq, {}, 16).poly, sq.poly, 1e-12)); }
  SUBCASE("random clipping against the pairwise oracle") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      const double th = 2 * 3.14159265358979323846 * u(rng);
      const Vec n = vec2(std::cos(th), std::sin(th));
      const Vec p = vec2(0.3 + 1.4 * u(rng), 0.3 + 1.4 * u(rng));  // interior point in coords
      const Halfspace cut{n, n.dot(p)};
      const ParamSet out = refine_set(sq, {cut}, 16);
      Mat H(5, 2);
      Vec g(5);
      H << 1, 0, -1, 0, 0, 1, 0, -1, n.transpose();
      g << 2, 0, 2, 0, cut.offset;
      const auto ref = oracle::hull_2d(oracle::pairwise_vertices(H, g));
      CHECK(out.vertex_count() == static_cast<int>(ref.size()));
      CHECK(volume(out.poly) == doctest::Approx(oracle::hull_area(ref)).epsilon(1e-9));
      CHECK(contains_set(out.poly, sq.poly));
    }
  }
  SUBCASE("vertex cap keeps nestedness and every consistent parameter") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Halfspace> cuts;
    for (int k = 0; k < 40; ++k) {
      const double th = 2 * 3.14159265358979323846 * k / 40;
      const Vec n = vec2(std::cos(th), std::sin(th));
      cuts.push_back({n, n.dot(vec2(1, 1)) + 0.8 + 0.1 * u(rng)});
    }
    const ParamSet out = refine_set(sq, cuts, 8);
    CHECK(out.vertex_count() <= 8);
    CHECK(contains_set(out.poly, sq.poly));
    // The centre satisfies every cut, so it must survive.
    CHECK(contains_point(out.poly, vec2(1, 1)));
    const ParamSet exact = refine_set(sq, cuts, 1000);
    CHECK(exact.vertex_count() > 8);
    CHECK(contains_set(exact.poly, out.poly));
  }
  SUBCASE("empty intersection throws") {
    const Halfspace a{vec2(1, 0), 0.5}, b{vec2(-1, 0), -1.0};
    CHECK_THROWS_AS(refine_set(sq, {a, b}, 16), UncertaintyError);
  }
  SUBCASE("set-membership rollout stays nested around the truth") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Mat truth = random_truth(rng);
    ParamSet set = make_param_set(example::psi_vertices());
    Vec x = example::x0();
    const double vol0 = volume(set.poly);
    for (int t = 0; t < 60; ++t) {
      const Vec uu = Vec::Constant(1, std::clamp(-0.1 * x(0) - 0.4 * x(1), -10.0, 10.0));
      Vec g(3);
      g << x, uu;
      const Vec xn = truth * g + vec2(0.1 * u(rng), 0.1 * u(rng));
      const ParamSet next = refine_set(set, nonfalsified_halfspaces(xn, x, uu, example::D(), set.chart), 16);
      CHECK(contains_set(next.poly, set.poly, 1e-8));
      CHECK(next.contains(truth, 1e-8));
      CHECK(next.vertex_count() <= 16);
      set = next;
      x = xn;
    }
    CHECK(volume(set.poly) < vol0);
  }
}

TEST_CASE("gradient step") {
  const Mat out = gradient_step(row(0, 0), Vec::Constant(1, 1.0), vec2(1, 0), 1.0);
  CHECK(out(0, 0) == doctest::Approx(0.5));
  CHECK(out(0, 1) == doctest::Approx(0.0));
  const Mat p = example::psi_mean();
  Vec g(3);
  g << 1.0, -2.0, 0.5;
  CHECK((gradient_step(p, p * g, g, 0.9) - p).norm() <= 1e-15);
  // Superposition in x_now.
  const Vec x1 = vec2(1, 2), x2 = vec2(-3, 0.5);
  const Mat lhs = gradient_step(p, 2 * x1 + 3 * x2, g, 0.9) - p;
  const Mat rhs = 2 * (gradient_step(p, x1, g, 0.9) - p) + 3 * (gradient_step(p, x2, g, 0.9) - p) -
                  4 * (gradient_step(p, Vec::Zero(2), g, 0.9) - p);
  CHECK((lhs - rhs).norm() <= 1e-12);
}

TEST_CASE("projection onto the parameter set") {
  const ParamSet s = make_param_set(example::psi_vertices());
  for (const auto& v : example::psi_vertices()) CHECK((project_to_set(v, s) - v).norm() <= 1e-12);

  SUBCASE("orthogonal displacement from an interior origin") {
    const auto v = example::psi_vertices();
    const Mat centre = example::psi_mean();
    ParamSet cs;
    cs.chart = build_chart({centre, v[0], v[1]});
    cs.poly = Polytope::from_vrep(std::vector<Vec>{cs.chart.coords(v[0]), cs.chart.coords(v[1]), cs.chart.coords(v[2])});
    Mat off = Mat::Zero(2, 3);
    off(0, 0) = 0.7;  // A11 is constant across vertices, so this is orthogonal to the chart
    CHECK((project_to_set(centre + off, cs) - centre).norm() <= 1e-9);
  }
  SUBCASE("grid nearest-point oracle") {
    std::vector<Vec> ring;
    for (const auto& c : s.poly.vertices()) ring.push_back(c);
    ring = oracle::hull_2d(ring);
    std::mt19937_64 rng(23);
    std::normal_distribution<double> nd(0.0, 0.5);
    int tested = 0;
    while (tested < 20) {
      Mat psi = example::psi_mean();
      for (int i = 0; i < psi.rows(); ++i)
        for (int j = 0; j < psi.cols(); ++j) psi(i, j) += nd(rng);
      const Vec c = s.chart.coords(psi);
      if (oracle::in_ring(ring, c, 0.0)) continue;
      ++tested;
      const Mat proj = project_to_set(psi, s);
      CHECK(s.contains(proj, 1e-8));
      const Vec ref = oracle::nearest_on_grid(ring, c, 401);
      CHECK((s.chart.coords(proj) - ref).norm() <= 1e-4);
    }
  }
}

TEST_CASE("hull with a point") {
  const ParamSet sq = unit_square_set();
  CHECK(same_set(hull_with_point(sq, row(0.2, -0.3)).poly, sq.poly, 1e-9));
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec p = vec2(u(rng), u(rng));
    const ParamSet h = hull_with_point(sq, row(p(0), p(1)));
    std::vector<Vec> pts = sq.poly.vertices();
    pts.push_back(sq.chart.coords(row(p(0), p(1))));
    CHECK(h.vertex_count() == static_cast<int>(oracle::hull_2d(pts).size()));
  }
  const ParamSet pt = make_param_set({row(1, 1), row(1, 1)});
  CHECK(pt.vertex_count() == 1);
  CHECK_THROWS_AS(hull_with_point(pt, row(2, 3)), UncertaintyError);  // leaves the rank-0 chart
  const ParamSet seg = make_param_set({row(0, 0), row(1, 1)});
  CHECK(hull_with_point(seg, row(3, 3)).vertex_count() == 2);
}

TEST_CASE("component vertex sets") {
  const ParamSet single = make_param_set({example::psi_true()});
  const auto z = component_vertex_sets(single, example::psi_true(), 2);
  REQUIRE(z.phi_A.size() == 1);
  CHECK(z.phi_A[0].norm() == 0.0);
  CHECK(z.phi_B[0].norm() == 0.0);

  const ParamSet s = make_param_set(example::psi_vertices());
  const Mat mean = example::psi_mean();
  const auto c = component_vertex_sets(s, mean, 2);
  REQUIRE(c.psi_A.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK((c.phi_A[i] + mean.leftCols(2) - c.psi_A[i]).norm() <= 1e-12);
    CHECK((c.phi_B[i] + mean.rightCols(1) - c.psi_B[i]).norm() <= 1e-12);
    bool matched = false;
    for (const auto& v : example::psi_vertices()) {
      Mat joined(2, 3);
      joined << c.psi_A[i], c.psi_B[i];
      matched = matched || (joined - v).norm() <= 1e-10;
    }
    CHECK(matched);
  }
}
