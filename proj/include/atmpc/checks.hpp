#pragma once

#include <string>
#include <vector>

#include "atmpc/config.hpp"
#include "atmpc/sim.hpp"

namespace atmpc {

struct InvariantResult {
  enum class Status { Pass, Fail, Skip };
  std::string name;
  Status status = Status::Pass;
  double worst = 0.0;  // largest violation seen (<= tolerance when passing)
  int first_failure = -1;
  std::string detail;
};
const char* to_string(InvariantResult::Status s);

/// Largest violation of X_TS in X, K X_TS in U and A_cl X_TS + W in X_TS.
double terminal_violation(const Mat& A_cl, const Mat& K, const Polytope& X, const Polytope& U, const Polytope& W,
                          const Polytope& X_TS);

/// Nestedness, truth membership, RPI and terminal certificates, one-step
/// containment, shifted-candidate residuals, feasibility, hard constraints and,
/// when D = {0} and Psi_0 is a single parameter, nominal cost decrease.
std::vector<InvariantResult> check_invariants(const RunTrace& tr, const PlantConfig& cfg, const Tolerances& tol);

bool all_passed(const std::vector<InvariantResult>& results);

}  // namespace atmpc
