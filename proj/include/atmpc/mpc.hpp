#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "atmpc/common.hpp"
#include "atmpc/polytope.hpp"
#include "atmpc/solver.hpp"
#include "atmpc/synthesis.hpp"

namespace atmpc {

class CocpError : public std::runtime_error {
 public:
  enum class Kind { DimensionMismatch, StateOutsideX };
  CocpError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Homothetic tube alpha_i + beta_i S with vertex inputs v[i][j], i < N.
struct TubeDecision {
  std::vector<Vec> alpha;             // N+1
  std::vector<double> beta;           // N+1
  std::vector<std::vector<Vec>> v;    // N x M

  int horizon() const { return static_cast<int>(v.size()); }
  /// z_i^j = alpha_i + beta_i s^j for every vertex s^j of S.
  std::vector<Vec> section_vertices(int i, const Polytope& S) const;
  Polytope section(int i, const Polytope& S) const;
};

struct COCPData {
  Mat A_hat, B_hat;
  GainPair gains;
  TubeShape shape;
  TerminalSet terminal;
  DisturbanceSets dist;
  Polytope X, U;
  Mat Q, R;
  int N = 0;
  bool enforce_reach_inclusion = false;

  int n() const { return static_cast<int>(A_hat.rows()); }
  int m() const { return static_cast<int>(B_hat.cols()); }
  int M() const { return shape.S.num_vertices(); }
  Mat A_cl() const { return A_hat + B_hat * gains.K; }
};

/// Offsets of each block inside the stacked decision vector (alpha, beta, v).
struct CocpLayout {
  int n = 0, m = 0, N = 0, M = 0;
  int alpha(int i) const { return i * n; }
  int beta(int i) const { return (N + 1) * n + i; }
  int v(int i, int j) const { return (N + 1) * (n + 1) + (i * M + j) * m; }
  int size() const { return (N + 1) * (n + 1) + N * M * m; }
};

CocpLayout cocp_layout(const COCPData& d);

/// Dense QP in the stacked decision vector.  Membership of every vertex
/// alpha_i + beta_i s^j in a polytope is written once per facet using
/// supp_S, which is exact because beta_i >= 0.
QPProblem build_cocp(const Vec& x_t, const COCPData& d);

TubeDecision decode_tube(const Vec& z, const COCPData& d);
Vec encode_tube(const TubeDecision& tube, const COCPData& d);

struct COCPResult {
  SolveStatus status = SolveStatus::Infeasible;
  TubeDecision tube;
  double cost = 0.0;       // J*, evaluated vertex by vertex
  double residual = 0.0;   // literal constraint residual of the solution
  double kkt_residual = 0.0;
  int iterations = 0;
  bool optimal() const { return status == SolveStatus::Optimal; }
};

/// Throws StateOutsideX when x_t violates the state constraints.
COCPResult solve_cocp(const Vec& x_t, const COCPData& d);

/// Largest violation of any COCP constraint, checked vertex by vertex
/// without the support-function compression used by build_cocp.
double constraint_residual(const TubeDecision& tube, const Vec& x_t, const COCPData& d);

/// Sum over vertices of the stage costs plus the terminal cost.
double tube_cost(const TubeDecision& tube, const COCPData& d);

/// max_k h_k'(x - alpha_i) - beta_i g_k over facets of S (<= 0 inside).
double section_violation(const Vec& x, const TubeDecision& tube, int i, const Polytope& S);

/// Convex-combination control law with minimum-norm weights over section 0.
Vec control_input(const Vec& x_t, const TubeDecision& tube, const TubeShape& shape);

/// Same law applied to an arbitrary section i (used by the reuse fast path).
Vec section_input(const Vec& x, const TubeDecision& tube, int i, const Polytope& S);

/// Feasible solution for the next step built from the previous optimum:
/// sections shifted by one, a new terminal section from the closed loop, and
/// inputs re-targeted by barycentric weights when the shape changed.
/// data_prev is the configuration that produced prev; data_next supplies the
/// (possibly refined) shape of the next problem.
TubeDecision shifted_candidate(const TubeDecision& prev, const COCPData& data_prev, const COCPData& data_next,
                               const Vec& x_next);

double stage_cost(const Vec& x, const Vec& u, const Mat& Q, const Mat& R);

}  // namespace atmpc
