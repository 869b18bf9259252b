#pragma once

#include <stdexcept>
#include <string>

#include "atmpc/common.hpp"

namespace atmpc {

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIter };

const char* to_string(SolveStatus s);

/// min c'x  s.t.  A_ineq x <= b_ineq,  A_eq x = b_eq,  lower <= x <= upper.
/// Empty bound vectors mean the variable is free on that side; infinite
/// entries are allowed.
struct LPProblem {
  Vec cost;
  Mat A_ineq;
  Vec b_ineq;
  Mat A_eq;
  Vec b_eq;
  Vec lower;
  Vec upper;

  Eigen::Index num_vars() const { return cost.size(); }
};

/// min 1/2 x'Hx + f'x  s.t.  A_ineq x <= b_ineq,  A_eq x = b_eq,
/// lower <= x <= upper.  H must be symmetric positive semi-definite.
struct QPProblem {
  Mat H;
  Vec f;
  Mat A_ineq;
  Vec b_ineq;
  Mat A_eq;
  Vec b_eq;
  Vec lower;
  Vec upper;

  Eigen::Index num_vars() const { return f.size(); }
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::MaxIter;
  Vec x;
  double objective = 0.0;
  // Max of scaled stationarity, primal infeasibility, dual infeasibility and
  // complementarity.  Only meaningful when status == Optimal.
  double kkt_residual = 0.0;
  int iterations = 0;
  // Multipliers (>= 0 for inequalities) in the sign convention
  // c + A_ineq' lambda + A_eq' mu = 0 (LP) or Hx + f + ... = 0 (QP).
  Vec dual_ineq;
  Vec dual_eq;

  bool optimal() const { return status == SolveStatus::Optimal; }
};

/// Dense two-phase simplex. Pivoting is Dantzig's rule with a switch to
/// Bland's rule on degenerate stalls; ties break on the lowest index, so the
/// outcome is a deterministic function of the input.
SolveOutcome solve_lp(const LPProblem& problem, int max_iterations = 10000);

/// Dense dual active-set (Goldfarb-Idnani) QP solver. Singular H is handled
/// with an outer proximal-point loop.
SolveOutcome solve_qp(const QPProblem& problem, int max_iterations = 10000);

class SolverError : public std::runtime_error {
 public:
  enum class Kind { NoConvergence, NonSymmetric, DimensionMismatch };
  SolverError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Terminal weight and feedback gain. The control law is u = K x.
struct GainPair {
  Mat P;
  Mat K;
};

/// Fixed point of the discrete Riccati iteration for (A, B, Q, R) and the
/// associated gain K = -(R + B'PB)^{-1} B'PA.  Throws
/// SolverError::NoConvergence when the iteration does not settle within
/// 10^4 steps (typically an unstabilizable pair).
GainPair synthesize_gain(const Mat& A, const Mat& B, const Mat& Q, const Mat& R);

/// P - (A+BK)'P(A+BK) - Q - K'RK.
Mat lyapunov_residual(const Mat& P_from, const Mat& P_to, const Mat& A, const Mat& B,
                      const Mat& K_closed, const Mat& K_stage, const Mat& Q, const Mat& R);

/// lambda_min(M) >= -tol.  Throws SolverError::NonSymmetric when M is not
/// symmetric within 1e-10.
bool min_eig_psd_check(const Mat& M, double tol);

}  // namespace atmpc
