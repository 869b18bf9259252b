#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "atmpc/controller.hpp"

namespace atmpc {

enum class DisturbancePolicy { UniformInD, VertexCycle, Zero };
const char* to_string(DisturbancePolicy p);
/// "uniform", "vertex_cycle" or "zero".
DisturbancePolicy parse_policy(const std::string& s);

/// UniformInD: rejection sampling over the bounding box of D.
/// VertexCycle: D's vertices in their stored order, step modulo count.
Vec sample_disturbance(DisturbancePolicy policy, const Polytope& D, std::mt19937_64& rng, int step);

Vec plant_step(const Vec& x, const Vec& u, const Vec& d, const Mat& A_true, const Mat& B_true);

struct PlantConfig {
  Mat A_true, B_true;
  ControllerConfig controller;
  Vec x0;
  int T_steps = 60;
  std::uint64_t seed = 0;
  DisturbancePolicy policy = DisturbancePolicy::UniformInD;
  /// Set the plant samples disturbances from; the controller's D when empty.
  std::optional<Polytope> D_true;
};

/// Raised by validate; field names the offending PlantConfig entry.
class InvalidConfig : public std::invalid_argument {
 public:
  InvalidConfig(std::string field, const std::string& what) : std::invalid_argument(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Throws InvalidConfig naming the first violated invariant.
void validate(const PlantConfig& cfg);

enum class RunStatus { Completed, InitiallyInfeasible, BrokenInvariant, ModelFalsified };
const char* to_string(RunStatus s);

struct RunTrace {
  Mode mode = Mode::Adaptive;
  std::uint64_t seed = 0;
  RunStatus status = RunStatus::Completed;
  std::string message;
  std::vector<StepRecord> steps;
  std::vector<Vec> states;         // x_0 .. x_T (one more than steps when completed)
  std::vector<Vec> disturbances;
  std::vector<double> cumulative_cost;
  int constraint_violations = 0;   // exact box check of every logged (x, u) and the final state

  double total_cost() const { return cumulative_cost.empty() ? 0.0 : cumulative_cost.back(); }
};

RunTrace run_closed_loop(const PlantConfig& cfg, Mode mode);

struct ComparisonRow {
  int t = 0;
  std::string mode_a, mode_b;
  double cumulative_cost_a = 0.0, cumulative_cost_b = 0.0;
  double psi_volume_a = 0.0, psi_volume_b = 0.0;
  double shape_volume_a = 0.0, shape_volume_b = 0.0;
  double terminal_volume_a = 0.0, terminal_volume_b = 0.0;
  /// max over sections i of the violation of T_a(i) inside T_b(i) (<= 0 means contained).
  double section_containment = 0.0;
  /// Same check against mode b's controller driven along trace a's states (NaN if not run).
  double same_state_containment = std::numeric_limits<double>::quiet_NaN();
  bool feasible_a = true, feasible_b = true;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  /// Per pair (first trace against each other trace): final cumulative costs.
  std::vector<ComparisonRow> summary;
};

class MismatchedConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Drives a non-adaptive controller along the measured states of reference
/// without simulating the plant, so its tubes can be set against the
/// reference tubes at equal states.  Throws std::invalid_argument for Adaptive.
RunTrace shadow_run(const PlantConfig& cfg, Mode mode, const RunTrace& reference);

/// Compares the first trace with every other one, step by step.  With cfg,
/// non-adaptive modes are also shadowed along the first trace's states.
ComparisonReport compare_runs(const std::vector<RunTrace>& traces, const PlantConfig* cfg = nullptr);

/// Largest violation of section i of tube a inside section i of tube b.
double section_containment(const TubeDecision& a, const Polytope& S_a, const TubeDecision& b, const Polytope& S_b, int i);

}  // namespace atmpc
