#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "atmpc/common.hpp"
#include "atmpc/polytope.hpp"
#include "atmpc/solver.hpp"

namespace atmpc {

class SynthesisError : public std::runtime_error {
 public:
  enum class Kind { NoContraction, NotFullDim, NoConvergence };
  SynthesisError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct SynthesisOptions {
  int max_facets = 40;           // F_max for disturbance and reach sets
  int facet_template = 24;       // template directions used when F_max is exceeded
  int max_shape_vertices = 12;   // M_max for the tube shape
  int shape_template = 12;       // template directions for the tube shape cap
  double rho_max = 0.05;         // contraction factor accepted by the mRPI construction
  int s_max = 50;
  int terminal_max_iter = 200;
  int shape_growth_steps = 10;   // 1% growth retries after capping
};

struct DisturbanceSets {
  Polytope W_global;
  std::vector<Polytope> W_step;   // i = 0..N-1
  std::vector<Polytope> X_reach;  // i = 0..N-1, X_reach[0] = {x_t}
};

struct TubeShape {
  Polytope S;
  int s_steps = 0;
  double rho = 0.0;
  double inflation = 1.0;  // extra growth applied after capping
  int num_vertices() const { return S.num_vertices(); }
};

struct TerminalSet {
  Polytope X_TS;
  int iterations = 0;
};

/// Phi_A X + Phi_B U + D, capped to the facet template when too complex.
Polytope lumped_disturbance_set(const std::vector<Mat>& phi_A, const std::vector<Mat>& phi_B, const Polytope& X,
                                const Polytope& U, const Polytope& D, const SynthesisOptions& opt = {});

/// X_reach[0] = {x_t}, X_reach[i+1] = (Psi_A X_reach[i] + Psi_B U + D) intersected with X.
std::vector<Polytope> reach_sets(const std::vector<Mat>& psi_A, const std::vector<Mat>& psi_B, const Vec& x_t,
                                 const Polytope& X, const Polytope& U, const Polytope& D, int N,
                                 const SynthesisOptions& opt = {});

/// W_step[i] = Phi_A X_reach[i] + Phi_B U + D.  When W_global is given the
/// result is clipped to it, which keeps W_step[i] inside W_global after capping.
std::vector<Polytope> stepwise_disturbance_sets(const std::vector<Mat>& phi_A, const std::vector<Mat>& phi_B,
                                                const std::vector<Polytope>& X_reach, const Polytope& U,
                                                const Polytope& D, const Polytope* W_global = nullptr,
                                                const SynthesisOptions& opt = {});

DisturbanceSets disturbance_sets(const std::vector<Mat>& psi_A, const std::vector<Mat>& psi_B,
                                 const std::vector<Mat>& phi_A, const std::vector<Mat>& phi_B, const Vec& x_t,
                                 const Polytope& X, const Polytope& U, const Polytope& D, int N,
                                 const SynthesisOptions& opt = {});

/// Outer approximation of the minimal RPI set of x+ = (A + BK)x + w, w in W,
/// via the (s, rho) geometric construction, capped to max_shape_vertices.
TubeShape tube_shape(const Mat& A, const Mat& B, const Mat& K, const Polytope& W, const SynthesisOptions& opt = {});

/// Maximal admissible RPI set for u = Kx inside X with Kx in U.
TerminalSet terminal_set(const Mat& A, const Mat& B, const Mat& K, const Polytope& X, const Polytope& U,
                         const Polytope& W, const SynthesisOptions& opt = {});

/// Violation of A_cl S + W inside S (<= 0 means invariant).
double rpi_violation(const Mat& A_cl, const Polytope& S, const Polytope& W);

enum class Verdict { Accept, RejectA, RejectB, RejectC };
const char* to_string(Verdict v);

struct CriterionResult {
  Verdict verdict = Verdict::Accept;
  double min_eig_a = 0.0;
  double min_eig_b = 0.0;
};

/// Gain-update acceptance test: (a) Lyapunov inequality for the candidate,
/// (b) one-step compatibility with the previous pair, (c) terminal set exists.
CriterionResult check_criterion(const GainPair& prev, const GainPair& cand, const Mat& A, const Mat& B, const Mat& Q,
                                const Mat& R, bool terminal_ok, double tol = 1e-8);

}  // namespace atmpc
