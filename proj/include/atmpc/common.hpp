#pragma once

#include <Eigen/Dense>

namespace atmpc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Geometry tolerance used for vertex/facet deduplication and incidence.
inline constexpr double kGeomTol = 1e-9;
// Tolerance for set inclusion certificates.
inline constexpr double kInclusionTol = 1e-7;

}  // namespace atmpc
