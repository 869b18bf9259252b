#pragma once

// Example system used across the tests: a 2-state, 1-input plant whose
// parameters are known to lie in a triangle of [A B] matrices.

#include <vector>

#include "atmpc/polytope.hpp"

namespace example {

using atmpc::Mat;
using atmpc::Vec;

inline Mat psi_true() {
  Mat p(2, 3);
  p << 0.2, 1.015, 1.08, -0.2825, 1.0, 3.0;
  return p;
}

inline std::vector<Mat> psi_vertices() {
  Mat a(2, 3), b(2, 3), c(2, 3);
  a << 0.2, 1.3, 0.7, 1.0, 1.0, 3.0;
  b << 0.2, 1.2, 0.9, 0.25, 1.0, 3.0;
  c << 0.2, 1.0, 1.1, -0.35, 1.0, 3.0;
  return {a, b, c};
}

inline Mat psi_mean() {
  const auto v = psi_vertices();
  return (v[0] + v[1] + v[2]) / 3.0;
}

inline atmpc::Polytope X() { return atmpc::Polytope::box(Vec::Constant(2, -20), Vec::Constant(2, 20)); }
inline atmpc::Polytope U() { return atmpc::Polytope::box(Vec::Constant(1, -10), Vec::Constant(1, 10)); }
inline atmpc::Polytope D() { return atmpc::Polytope::box(Vec::Constant(2, -0.1), Vec::Constant(2, 0.1)); }

inline Vec x0() {
  Vec x(2);
  x << 18, -18;
  return x;
}

inline Mat Q() { return Mat::Identity(2, 2); }
inline Mat R() { return Mat::Constant(1, 1, 0.1); }

}  // namespace example
