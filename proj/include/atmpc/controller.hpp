#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "atmpc/mpc.hpp"
#include "atmpc/uncertainty.hpp"

namespace atmpc {

enum class Mode {
  Adaptive,          // set refinement, estimation, gain and set re-synthesis
  NonAdaptiveReach,  // fixed parameters, per-step reach-based disturbance sets
  RobustFixed,       // fixed parameters, global disturbance set at every stage
};
const char* to_string(Mode m);
/// "adaptive", "reach" or "robust".
Mode parse_mode(const std::string& s);

class ControllerError : public std::runtime_error {
 public:
  enum class Kind { InitiallyInfeasible, BrokenInvariant };
  ControllerError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct ControllerConfig {
  Polytope X, U, D;
  std::vector<Mat> psi_vertices;
  Mat psi_hat0;
  Mat Q, R;
  int N = 10;
  double kappa = 0.9;
  Mode mode = Mode::Adaptive;
  int max_param_vertices = 16;
  SynthesisOptions synthesis;
  bool enforce_reach_inclusion = false;
  /// On a failed backup solve, apply the shifted previous solution instead of aborting.
  bool reuse_previous_on_infeasible = false;
  /// Evaluate the shifted previous solution against this step's backup problem.
  bool check_candidate = true;

  int n() const { return static_cast<int>(psi_hat0.rows()); }
  int m() const { return static_cast<int>(psi_hat0.cols()) - n(); }
};

struct StepRecord {
  static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  int t = 0;
  Vec x, u;
  double cost = kNaN;          // J*
  double stage_cost = kNaN;
  bool backup = false;
  bool fast_path = false;
  bool refinement_only = false;
  std::string verdict;         // initial, fixed, accept, reject_a, reject_b, reject_c, infeasible
  std::string solver_status;
  int solver_iterations = 0;
  double solver_residual = kNaN;
  double candidate_residual = kNaN;     // shifted previous solution vs backup problem
  double containment_violation = kNaN;  // x_t against section 1 of the previous tube
  double estimator_energy = kNaN;       // |e_t|^2 (1 + g'g)
  Vec prediction_error;

  Mat psi_hat;
  GainPair gains;
  ParamSet psi_set;
  COCPData data;
  TubeDecision tube;

  double psi_volume = kNaN, shape_volume = kNaN, terminal_volume = kNaN;
};

struct ControllerState {
  int t = 0;
  ParamSet psi_set;
  Mat psi_hat;
  GainPair gains;
  GainPair prev_gains;
  std::optional<TubeDecision> last_tube;
  std::optional<COCPData> last_data;
  bool backup_flag = false;
  Mode mode = Mode::Adaptive;
  bool has_prev = false;
  Vec x_prev, u_prev;
};

ControllerState initial_state(const ControllerConfig& cfg);

struct StepOutput {
  Vec u;
  ControllerState state;
  StepRecord record;
};

/// One iteration of the adaptive tube MPC loop at measured state x_t.
/// Throws InitiallyInfeasible at t = 0 and BrokenInvariant when the backup
/// problem is infeasible or the state has left X.
StepOutput controller_step(const ControllerState& state, const Vec& x_t, const ControllerConfig& cfg);

/// Sets, gains and disturbance bounds for a given estimate.  prev, when it was
/// built with the same estimate and gain, supplies the shape to keep if the
/// recomputed one is not nested inside it.
COCPData synthesize_data(const ControllerConfig& cfg, const ParamSet& set, const Mat& psi_hat, const GainPair& gains,
                         const Vec& x_t, const COCPData* prev = nullptr, bool* kept_shape = nullptr);

}  // namespace atmpc
