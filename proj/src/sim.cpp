#include "atmpc/sim.hpp"

#include <algorithm>
#include <cmath>

namespace atmpc {

const char* to_string(DisturbancePolicy p) {
  switch (p) {
    case DisturbancePolicy::UniformInD: return "uniform";
    case DisturbancePolicy::VertexCycle: return "vertex_cycle";
    case DisturbancePolicy::Zero: return "zero";
  }
  return "unknown";
}

DisturbancePolicy parse_policy(const std::string& s) {
  if (s == "uniform") return DisturbancePolicy::UniformInD;
  if (s == "vertex_cycle") return DisturbancePolicy::VertexCycle;
  if (s == "zero") return DisturbancePolicy::Zero;
  throw std::invalid_argument("unknown disturbance policy '" + s + "' (expected uniform, vertex_cycle or zero)");
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::InitiallyInfeasible: return "initially_infeasible";
    case RunStatus::BrokenInvariant: return "broken_invariant";
    case RunStatus::ModelFalsified: return "model_falsified";
  }
  return "unknown";
}

Vec sample_disturbance(DisturbancePolicy policy, const Polytope& D, std::mt19937_64& rng, int step) {
  const int n = D.dim();
  switch (policy) {
    case DisturbancePolicy::Zero: return Vec::Zero(n);
    case DisturbancePolicy::VertexCycle: {
      const auto& v = D.vertices();
      return v[static_cast<std::size_t>(step) % v.size()];
    }
    case DisturbancePolicy::UniformInD: break;
  }
  Vec lo = D.vertices().front(), hi = lo;
  for (const auto& v : D.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Vec d(n);
    for (int k = 0; k < n; ++k) d(k) = lo(k) + (hi(k) - lo(k)) * unit(rng);
    if (contains_point(D, d, 0.0)) return d;
  }
  // Lower-dimensional D: fall back to the vertex mean, which lies in D.
  Vec c = Vec::Zero(n);
  for (const auto& v : D.vertices()) c += v;
  return c / static_cast<double>(D.num_vertices());
}

Vec plant_step(const Vec& x, const Vec& u, const Vec& d, const Mat& A_true, const Mat& B_true) {
  return A_true * x + B_true * u + d;
}

void validate(const PlantConfig& cfg) {
  const ControllerConfig& c = cfg.controller;
  const int n = static_cast<int>(cfg.A_true.rows());
  const int m = static_cast<int>(cfg.B_true.cols());
  auto fail = [](const char* field, const std::string& what) { throw InvalidConfig(field, what); };
  if (cfg.A_true.cols() != n || n == 0) fail("A_true", "A_true must be square and non-empty");
  if (cfg.B_true.rows() != n || m == 0) fail("B_true", "B_true must have as many rows as A_true");
  if (c.X.dim() != n) fail("X", "X has the wrong dimension");
  if (c.U.dim() != m) fail("U", "U has the wrong dimension");
  if (c.D.dim() != n) fail("D", "D has the wrong dimension");
  if (c.X.is_empty()) fail("X", "X is empty");
  if (c.U.is_empty()) fail("U", "U is empty");
  if (c.D.is_empty()) fail("D", "D is empty");
  if (cfg.D_true && (cfg.D_true->dim() != n || cfg.D_true->is_empty()))
    fail("D_true", "D_true must be a non-empty set of the state dimension");
  if (cfg.x0.size() != n) fail("x0", "x0 has the wrong size");
  if (c.psi_vertices.empty()) fail("psi_vertices", "psi_vertices is empty");
  for (const auto& v : c.psi_vertices)
    if (v.rows() != n || v.cols() != n + m) fail("psi_vertices", "psi_vertices entries must be n x (n+m)");
  if (c.psi_hat0.rows() != n || c.psi_hat0.cols() != n + m) fail("psi_hat0", "psi_hat0 must be n x (n+m)");
  if (!(c.kappa > 0.0 && c.kappa < 2.0)) fail("kappa", "kappa out of (0,2)");
  if (c.N < 1) fail("N", "horizon N must be positive");
  if (cfg.T_steps < 0) fail("T_steps", "T_steps must be non-negative");
  if (c.Q.rows() != n || c.Q.cols() != n) fail("Q", "Q must be n x n");
  if (c.R.rows() != m || c.R.cols() != m) fail("R", "R must be m x m");
  auto symmetric = [](const Mat& M) {
    return (M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + M.cwiseAbs().maxCoeff());
  };
  if (!symmetric(c.Q) || !min_eig_psd_check(c.Q, 0.0)) fail("Q", "Q must be symmetric positive semi-definite");
  if (!symmetric(c.R) || Eigen::SelfAdjointEigenSolver<Mat>(c.R).eigenvalues().minCoeff() <= 0.0)
    fail("R", "R must be symmetric positive definite");
  if (c.max_param_vertices < 1) fail("L_max", "L_max must be positive");
  if (!contains_point(c.X, cfg.x0, 0.0)) fail("x0", "x0 is outside X");
  const ParamSet set = make_param_set(c.psi_vertices);
  Mat truth(n, n + m);
  truth << cfg.A_true, cfg.B_true;
  if (!set.contains(truth, 1e-8)) fail("A_true", "true parameters [A_true B_true] are not inside the parameter set");
  if (!set.contains(c.psi_hat0, 1e-8)) fail("psi_hat0", "psi_hat0 is not inside the parameter set");
}

RunTrace run_closed_loop(const PlantConfig& cfg, Mode mode) {
  validate(cfg);
  ControllerConfig cc = cfg.controller;
  cc.mode = mode;
  RunTrace tr;
  tr.mode = mode;
  tr.seed = cfg.seed;
  std::mt19937_64 rng(cfg.seed);
  ControllerState st = initial_state(cc);
  Vec x = cfg.x0;
  tr.states.push_back(x);
  double cum = 0.0;
  for (int t = 0; t < cfg.T_steps; ++t) {
    StepOutput out;
    try {
      out = controller_step(st, x, cc);
    } catch (const ControllerError& e) {
      tr.status = e.kind() == ControllerError::Kind::InitiallyInfeasible ? RunStatus::InitiallyInfeasible
                                                                         : RunStatus::BrokenInvariant;
      tr.message = e.what();
      break;
    } catch (const UncertaintyError& e) {
      tr.status = RunStatus::ModelFalsified;
      tr.message = e.what();
      break;
    }
    if (!contains_point(cc.X, x, 0.0) || !contains_point(cc.U, out.u, 0.0)) ++tr.constraint_violations;
    cum += out.record.stage_cost;
    tr.cumulative_cost.push_back(cum);
    const Vec d = sample_disturbance(cfg.policy, cfg.D_true ? *cfg.D_true : cc.D, rng, t);
    tr.disturbances.push_back(d);
    x = plant_step(x, out.u, d, cfg.A_true, cfg.B_true);
    tr.states.push_back(x);
    tr.steps.push_back(std::move(out.record));
    st = std::move(out.state);
  }
  if (tr.status == RunStatus::Completed && !contains_point(cc.X, x, 0.0)) ++tr.constraint_violations;
  return tr;
}

double section_containment(const TubeDecision& a, const Polytope& S_a, const TubeDecision& b, const Polytope& S_b,
                           int i) {
  const HPolytope& h = S_b.hrep();
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& z : a.section_vertices(i, S_a))
    for (int k = 0; k < h.size(); ++k)
      worst = std::max(worst, h.normals.row(k).dot(z - b.alpha[i]) - b.beta[i] * h.offsets(k));
  return worst;
}

RunTrace shadow_run(const PlantConfig& cfg, Mode mode, const RunTrace& reference) {
  if (mode == Mode::Adaptive) throw std::invalid_argument("shadow_run: the adaptive controller needs its own inputs");
  validate(cfg);
  ControllerConfig cc = cfg.controller;
  cc.mode = mode;
  RunTrace tr;
  tr.mode = mode;
  tr.seed = reference.seed;
  ControllerState st = initial_state(cc);
  double cum = 0.0;
  for (std::size_t t = 0; t < reference.steps.size(); ++t) {
    const Vec& x = reference.states[t];
    tr.states.push_back(x);
    StepOutput out;
    try {
      out = controller_step(st, x, cc);
    } catch (const ControllerError& e) {
      tr.status = e.kind() == ControllerError::Kind::InitiallyInfeasible ? RunStatus::InitiallyInfeasible
                                                                         : RunStatus::BrokenInvariant;
      tr.message = e.what();
      break;
    }
    cum += out.record.stage_cost;
    tr.cumulative_cost.push_back(cum);
    tr.steps.push_back(std::move(out.record));
    st = std::move(out.state);
  }
  return tr;
}

namespace {

double max_section_containment(const StepRecord& a, const StepRecord& b) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= a.tube.horizon() && i <= b.tube.horizon(); ++i)
    worst = std::max(worst, section_containment(a.tube, a.data.shape.S, b.tube, b.data.shape.S, i));
  return worst;
}

}  // namespace

ComparisonReport compare_runs(const std::vector<RunTrace>& traces, const PlantConfig* cfg) {
  if (traces.size() < 2) throw MismatchedConfig("compare_runs: need at least two traces");
  const RunTrace& ref = traces.front();
  for (const auto& tr : traces) {
    if (tr.seed != ref.seed) throw MismatchedConfig("compare_runs: traces use different seeds");
    if (tr.states.empty() || ref.states.empty() || tr.states.front() != ref.states.front())
      throw MismatchedConfig("compare_runs: traces start from different states");
  }
  ComparisonReport rep;
  for (std::size_t k = 1; k < traces.size(); ++k) {
    const RunTrace& b = traces[k];
    RunTrace shadow;
    const bool shadowed = cfg && b.mode != Mode::Adaptive;
    if (shadowed) shadow = shadow_run(*cfg, b.mode, ref);
    const std::size_t T = std::max(ref.steps.size(), b.steps.size());
    ComparisonRow last;
    for (std::size_t t = 0; t < T; ++t) {
      ComparisonRow row;
      row.t = static_cast<int>(t);
      row.mode_a = to_string(ref.mode);
      row.mode_b = to_string(b.mode);
      row.feasible_a = t < ref.steps.size();
      row.feasible_b = t < b.steps.size();
      if (row.feasible_a) {
        const StepRecord& s = ref.steps[t];
        row.cumulative_cost_a = ref.cumulative_cost[t];
        row.psi_volume_a = s.psi_volume;
        row.shape_volume_a = s.shape_volume;
        row.terminal_volume_a = s.terminal_volume;
      }
      if (row.feasible_b) {
        const StepRecord& s = b.steps[t];
        row.cumulative_cost_b = b.cumulative_cost[t];
        row.psi_volume_b = s.psi_volume;
        row.shape_volume_b = s.shape_volume;
        row.terminal_volume_b = s.terminal_volume;
      }
      row.section_containment = std::numeric_limits<double>::quiet_NaN();
      if (row.feasible_a && row.feasible_b) {
        row.section_containment = max_section_containment(ref.steps[t], b.steps[t]);
      }
      if (shadowed && row.feasible_a && t < shadow.steps.size())
        row.same_state_containment = max_section_containment(ref.steps[t], shadow.steps[t]);
      rep.rows.push_back(row);
      last = row;
    }
    rep.summary.push_back(last);
  }
  return rep;
}

}  // namespace atmpc
