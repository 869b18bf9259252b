#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "atmpc/solver.hpp"

namespace atmpc {

GainPair synthesize_gain(const Mat& A, const Mat& B, const Mat& Q, const Mat& R) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != m || R.cols() != m)
    throw SolverError(SolverError::Kind::DimensionMismatch, "synthesize_gain: inconsistent dimensions");

  Mat P = Q;
  for (int it = 0; it < 10000; ++it) {
    const Mat S = R + B.transpose() * P * B;
    const Mat BtPA = B.transpose() * P * A;
    const Mat K = -S.partialPivLu().solve(BtPA);
    const Mat Acl = A + B * K;
    Mat next = Q + K.transpose() * R * K + Acl.transpose() * P * Acl;
    next = 0.5 * (next + next.transpose());
    const double diff = (next - P).norm();
    P = next;
    if (!P.allFinite()) break;
    if (diff <= 1e-10) {
      const Mat Sf = R + B.transpose() * P * B;
      return {P, -Sf.partialPivLu().solve(B.transpose() * P * A)};
    }
  }
  throw SolverError(SolverError::Kind::NoConvergence, "synthesize_gain: Riccati iteration did not converge");
}

Mat lyapunov_residual(const Mat& P_from, const Mat& P_to, const Mat& A, const Mat& B, const Mat& K_closed,
                      const Mat& K_stage, const Mat& Q, const Mat& R) {
  const Mat Acl = A + B * K_closed;
  Mat M = P_from - Acl.transpose() * P_to * Acl - Q - K_stage.transpose() * R * K_stage;
  return 0.5 * (M + M.transpose());
}

bool min_eig_psd_check(const Mat& M, double tol) {
  if (M.rows() != M.cols())
    throw SolverError(SolverError::Kind::DimensionMismatch, "min_eig_psd_check: matrix is not square");
  if (M.size() == 0) return true;
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + M.cwiseAbs().maxCoeff()))
    throw SolverError(SolverError::Kind::NonSymmetric, "min_eig_psd_check: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

}  // namespace atmpc
