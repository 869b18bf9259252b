#include "atmpc/controller.hpp"

#include <cmath>

namespace atmpc {

const char* to_string(Mode m) {
  switch (m) {
    case Mode::Adaptive: return "adaptive";
    case Mode::NonAdaptiveReach: return "reach";
    case Mode::RobustFixed: return "robust";
  }
  return "unknown";
}

Mode parse_mode(const std::string& s) {
  if (s == "adaptive") return Mode::Adaptive;
  if (s == "reach") return Mode::NonAdaptiveReach;
  if (s == "robust") return Mode::RobustFixed;
  throw std::invalid_argument("unknown mode '" + s + "' (expected adaptive, reach or robust)");
}

namespace {

bool same_config(const COCPData& d, const Mat& A, const Mat& B, const Mat& K) {
  return d.A_hat == A && d.B_hat == B && d.gains.K == K;
}

void robust_stage_sets(DisturbanceSets& ds, const Vec& x_t, const Polytope& X, int N) {
  ds.W_step.assign(static_cast<std::size_t>(N), ds.W_global);
  ds.X_reach.assign(static_cast<std::size_t>(N), X);
  ds.X_reach[0] = Polytope::point(x_t);
}

// Per-step refresh of the state-dependent sets for the non-adaptive modes.
COCPData refresh_stage_sets(const ControllerConfig& cfg, COCPData d, const ParamSet& set, const Mat& psi_hat,
                            const Vec& x_t) {
  if (cfg.mode == Mode::RobustFixed) {
    robust_stage_sets(d.dist, x_t, cfg.X, cfg.N);
    return d;
  }
  const auto cv = component_vertex_sets(set, psi_hat, cfg.n());
  d.dist.X_reach = reach_sets(cv.psi_A, cv.psi_B, x_t, cfg.X, cfg.U, cfg.D, cfg.N, cfg.synthesis);
  d.dist.W_step =
      stepwise_disturbance_sets(cv.phi_A, cv.phi_B, d.dist.X_reach, cfg.U, cfg.D, &d.dist.W_global, cfg.synthesis);
  return d;
}

void fill_volumes(StepRecord& rec) {
  rec.psi_volume = rec.psi_set.chart.rank() == rec.psi_set.poly.dim() ? volume(rec.psi_set.poly) : 0.0;
  rec.shape_volume = volume(rec.data.shape.S);
  rec.terminal_volume = volume(rec.data.terminal.X_TS);
}

[[noreturn]] void broken(const std::string& what) {
  throw ControllerError(ControllerError::Kind::BrokenInvariant, what);
}

}  // namespace

COCPData synthesize_data(const ControllerConfig& cfg, const ParamSet& set, const Mat& psi_hat, const GainPair& gains,
                         const Vec& x_t, const COCPData* prev, bool* kept_shape) {
  const int n = cfg.n();
  COCPData d;
  d.A_hat = psi_hat.leftCols(n);
  d.B_hat = psi_hat.rightCols(cfg.m());
  d.gains = gains;
  d.X = cfg.X;
  d.U = cfg.U;
  d.Q = cfg.Q;
  d.R = cfg.R;
  d.N = cfg.N;
  d.enforce_reach_inclusion = cfg.enforce_reach_inclusion;
  const auto cv = component_vertex_sets(set, psi_hat, n);
  d.dist = disturbance_sets(cv.psi_A, cv.psi_B, cv.phi_A, cv.phi_B, x_t, cfg.X, cfg.U, cfg.D, cfg.N, cfg.synthesis);
  if (cfg.mode == Mode::RobustFixed) robust_stage_sets(d.dist, x_t, cfg.X, cfg.N);
  d.terminal = terminal_set(d.A_hat, d.B_hat, gains.K, cfg.X, cfg.U, d.dist.W_global, cfg.synthesis);
  d.shape = tube_shape(d.A_hat, d.B_hat, gains.K, d.dist.W_global, cfg.synthesis);
  if (kept_shape) *kept_shape = false;
  if (prev && same_config(*prev, d.A_hat, d.B_hat, gains.K) && !contains_set(d.shape.S, prev->shape.S, 1e-9) &&
      rpi_violation(d.A_cl(), prev->shape.S, d.dist.W_global) <= 1e-9) {
    // Refinement only: the previous shape is still invariant for the smaller
    // disturbance set and keeps the shifted solution feasible.
    d.shape = prev->shape;
    if (kept_shape) *kept_shape = true;
  }
  return d;
}

ControllerState initial_state(const ControllerConfig& cfg) {
  ControllerState s;
  s.psi_set = make_param_set(cfg.psi_vertices);
  if (!s.psi_set.contains(cfg.psi_hat0, 1e-8))
    throw std::invalid_argument("initial estimate is not inside the parameter set");
  s.psi_hat = cfg.psi_hat0;
  s.mode = cfg.mode;
  return s;
}

StepOutput controller_step(const ControllerState& st, const Vec& x_t, const ControllerConfig& cfg) {
  const int n = cfg.n();
  StepOutput out;
  StepRecord& rec = out.record;
  rec.t = st.t;
  rec.x = x_t;
  if (!contains_point(cfg.X, x_t, 0.0)) broken("state left the state constraint set at t=" + std::to_string(st.t));
  if (st.last_tube) rec.containment_violation = section_violation(x_t, *st.last_tube, 1, st.last_data->shape.S);

  ParamSet psi_set = st.psi_set;
  Mat psi_hat = st.psi_hat;
  if (st.has_prev) {
    Vec g(st.x_prev.size() + st.u_prev.size());
    g << st.x_prev, st.u_prev;
    const double m2 = 1.0 + g.squaredNorm();
    rec.prediction_error = (x_t - st.psi_hat * g) / m2;
    rec.estimator_energy = rec.prediction_error.squaredNorm() * m2;
    if (cfg.mode == Mode::Adaptive && !st.backup_flag) {
      psi_set = refine_set(st.psi_set, nonfalsified_halfspaces(x_t, st.x_prev, st.u_prev, cfg.D, st.psi_set.chart),
                           cfg.max_param_vertices);
      psi_hat = project_to_set(gradient_step(st.psi_hat, x_t, g, cfg.kappa), psi_set);
    }
  }

  GainPair gains = st.gains;
  COCPData data;
  COCPResult res;
  bool backup = false;
  std::optional<COCPData> backup_data;

  auto make_backup = [&]() -> const COCPData& {
    if (!backup_data) {
      const ParamSet hull = cfg.mode == Mode::Adaptive ? hull_with_point(psi_set, st.psi_hat) : psi_set;
      if (cfg.mode == Mode::Adaptive)
        backup_data = synthesize_data(cfg, hull, st.psi_hat, st.gains, x_t, &*st.last_data);
      else
        backup_data = refresh_stage_sets(cfg, *st.last_data, psi_set, psi_hat, x_t);
    }
    return *backup_data;
  };

  if (st.t == 0) {
    try {
      gains = synthesize_gain(psi_hat.leftCols(n), psi_hat.rightCols(cfg.m()), cfg.Q, cfg.R);
      data = synthesize_data(cfg, psi_set, psi_hat, gains, x_t);
    } catch (const std::exception& e) {
      throw ControllerError(ControllerError::Kind::InitiallyInfeasible,
                            std::string("initial synthesis failed: ") + e.what());
    }
    res = solve_cocp(x_t, data);
    rec.verdict = "initial";
    if (!res.optimal())
      throw ControllerError(ControllerError::Kind::InitiallyInfeasible,
                            "initial problem is infeasible (solver status " + std::string(to_string(res.status)) + ")");
  } else if (cfg.mode != Mode::Adaptive) {
    data = make_backup();
    res = solve_cocp(x_t, data);
    rec.verdict = "fixed";
  } else {
    const Mat A = psi_hat.leftCols(n), B = psi_hat.rightCols(cfg.m());
    GainPair cand = st.gains;
    bool synthesized = true;
    std::optional<COCPData> cand_data;
    try {
      if (psi_hat != st.psi_hat) cand = synthesize_gain(A, B, cfg.Q, cfg.R);
      cand_data = synthesize_data(cfg, psi_set, psi_hat, cand, x_t, &*st.last_data);
    } catch (const SolverError&) {
      synthesized = false;
    } catch (const SynthesisError&) {
      synthesized = false;
    }
    const CriterionResult crit = check_criterion(st.gains, cand, A, B, cfg.Q, cfg.R, synthesized && cand_data);
    rec.verdict = to_string(crit.verdict);
    if (crit.verdict == Verdict::Accept) {
      data = *cand_data;
      gains = cand;
      res = solve_cocp(x_t, data);
      if (!res.optimal()) rec.verdict = "infeasible";
    }
    if (crit.verdict != Verdict::Accept || !res.optimal()) {
      backup = true;
      psi_set = hull_with_point(psi_set, st.psi_hat);
      psi_hat = st.psi_hat;
      gains = st.gains;
      data = make_backup();
      res = solve_cocp(x_t, data);
    }
  }

  if (st.t > 0 && cfg.check_candidate && st.last_tube) {
    try {
      const COCPData& bd = make_backup();
      const TubeDecision cand = shifted_candidate(*st.last_tube, *st.last_data, bd, x_t);
      rec.candidate_residual = constraint_residual(cand, x_t, bd);
    } catch (const std::exception&) {
      rec.candidate_residual = std::numeric_limits<double>::infinity();
    }
  }

  if (!res.optimal()) {
    if (!cfg.reuse_previous_on_infeasible || !st.last_tube)
      broken("problem infeasible after backup at t=" + std::to_string(st.t) + " (solver status " +
             to_string(res.status) + ")");
    // Shifted previous solution, evaluated at the measured state.
    res.tube = shifted_candidate(*st.last_tube, *st.last_data, data, x_t);
    res.cost = tube_cost(res.tube, data);
    res.residual = constraint_residual(res.tube, x_t, data);
    rec.fast_path = true;
  }

  rec.refinement_only = st.last_data && same_config(*st.last_data, data.A_hat, data.B_hat, data.gains.K);
  out.u = control_input(x_t, res.tube, data.shape);
  rec.u = out.u;
  rec.cost = res.cost;
  rec.stage_cost = stage_cost(x_t, out.u, cfg.Q, cfg.R);
  rec.backup = backup;
  rec.solver_status = to_string(res.status);
  rec.solver_iterations = res.iterations;
  rec.solver_residual = res.residual;
  rec.psi_hat = psi_hat;
  rec.gains = gains;
  rec.psi_set = psi_set;
  rec.data = data;
  rec.tube = res.tube;
  fill_volumes(rec);

  ControllerState& ns = out.state;
  ns = st;
  ns.t = st.t + 1;
  ns.psi_set = psi_set;
  ns.psi_hat = psi_hat;
  ns.prev_gains = st.t == 0 ? gains : st.gains;
  ns.gains = gains;
  ns.last_tube = res.tube;
  ns.last_data = data;
  // c_backup is cleared by any feasible solve, backup retries included; only
  // the reuse fast path leaves it set and skips the next update.
  ns.backup_flag = rec.fast_path;
  ns.has_prev = true;
  ns.x_prev = x_t;
  ns.u_prev = out.u;
  return out;
}

}  // namespace atmpc
