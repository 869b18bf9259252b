#include "atmpc/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace atmpc {

const char* to_string(InvariantResult::Status s) {
  switch (s) {
    case InvariantResult::Status::Pass: return "pass";
    case InvariantResult::Status::Fail: return "fail";
    case InvariantResult::Status::Skip: return "skip";
  }
  return "unknown";
}

double terminal_violation(const Mat& A_cl, const Mat& K, const Polytope& X, const Polytope& U, const Polytope& W,
                          const Polytope& X_TS) {
  double worst = -std::numeric_limits<double>::infinity();
  const HPolytope& hx = X.hrep();
  for (int k = 0; k < hx.size(); ++k)
    worst = std::max(worst, support(X_TS, hx.normals.row(k).transpose()) - hx.offsets(k));
  const HPolytope& hu = U.hrep();
  for (int k = 0; k < hu.size(); ++k)
    worst = std::max(worst, support(X_TS, K.transpose() * hu.normals.row(k).transpose()) - hu.offsets(k));
  const HPolytope& ht = X_TS.hrep();
  for (int k = 0; k < ht.size(); ++k) {
    const Vec h = ht.normals.row(k).transpose();
    worst = std::max(worst, support(X_TS, A_cl.transpose() * h) + support(W, h) - ht.offsets(k));
  }
  return worst;
}

namespace {

// Accumulates the worst value of a series and the first step above tol.
struct Tracker {
  InvariantResult r;
  double tol;
  Tracker(std::string name, double tol_) : tol(tol_) {
    r.name = std::move(name);
    r.worst = -std::numeric_limits<double>::infinity();
  }
  void add(int t, double v) {
    if (std::isnan(v)) return;
    r.worst = std::max(r.worst, v);
    if (v > tol && r.first_failure < 0) r.first_failure = t;
  }
  InvariantResult done(const std::string& what) {
    if (!std::isfinite(r.worst) && r.worst < 0) {
      r.status = InvariantResult::Status::Skip;
      r.detail = "no data";
      return r;
    }
    r.status = r.first_failure < 0 ? InvariantResult::Status::Pass : InvariantResult::Status::Fail;
    r.detail = what;
    if (r.first_failure >= 0) r.detail += ", first failure at t=" + std::to_string(r.first_failure);
    return r;
  }
};

}  // namespace

std::vector<InvariantResult> check_invariants(const RunTrace& tr, const PlantConfig& cfg, const Tolerances& tol) {
  std::vector<InvariantResult> out;
  const ControllerConfig& c = cfg.controller;

  InvariantResult run;
  run.name = "recursive_feasibility";
  run.status = tr.status == RunStatus::Completed ? InvariantResult::Status::Pass : InvariantResult::Status::Fail;
  for (const auto& s : tr.steps)
    if (s.solver_status != "optimal" && run.first_failure < 0) {
      run.status = InvariantResult::Status::Fail;
      run.first_failure = s.t;
    }
  run.detail = std::string(to_string(tr.status)) + (tr.message.empty() ? "" : ": " + tr.message);
  out.push_back(run);

  InvariantResult hard;
  hard.name = "hard_constraints";
  hard.worst = tr.constraint_violations;
  hard.status = tr.constraint_violations == 0 ? InvariantResult::Status::Pass : InvariantResult::Status::Fail;
  hard.detail = std::to_string(tr.constraint_violations) + " violating steps (exact box check)";
  out.push_back(hard);

  Mat truth(cfg.A_true.rows(), cfg.A_true.cols() + cfg.B_true.cols());
  truth << cfg.A_true, cfg.B_true;
  Tracker nested("nested_uncertainty_sets", tol.nested), member("truth_in_set", tol.nested);
  Tracker rpi("tube_shape_rpi", tol.invariance), term("terminal_set_invariance", tol.invariance);
  Tracker contain("one_step_containment", tol.containment), cand("shifted_candidate", tol.candidate);
  for (std::size_t t = 0; t < tr.steps.size(); ++t) {
    const StepRecord& s = tr.steps[t];
    const int ti = s.t;
    const AffineChart& chart = s.psi_set.chart;
    member.add(ti, s.psi_set.poly.dim() == 0 ? chart.residual(truth) : point_violation(s.psi_set.poly, chart.coords(truth)));
    if (t + 1 < tr.steps.size()) {
      double worst = -std::numeric_limits<double>::infinity();
      for (const auto& v : tr.steps[t + 1].psi_set.vertex_matrices())
        worst = std::max(worst, s.psi_set.poly.dim() == 0 ? chart.residual(v)
                                                          : std::max(chart.residual(v), point_violation(s.psi_set.poly, chart.coords(v))));
      nested.add(ti + 1, worst);
    }
    const COCPData& d = s.data;
    rpi.add(ti, rpi_violation(d.A_cl(), d.shape.S, d.dist.W_global));
    term.add(ti, terminal_violation(d.A_cl(), d.gains.K, d.X, d.U, d.dist.W_global, d.terminal.X_TS));
    contain.add(ti, s.containment_violation);
    cand.add(ti, s.candidate_residual);
  }
  out.push_back(nested.done("Psi_{t+1} inside Psi_t"));
  out.push_back(member.done("[A_true B_true] inside Psi_t"));
  out.push_back(rpi.done("A_cl S + W inside S"));
  out.push_back(term.done("X_TS inside X, K X_TS inside U, A_cl X_TS + W inside X_TS"));
  out.push_back(contain.done("x_{t+1} inside section 1 of the tube at t"));
  out.push_back(cand.done("shifted previous solution against the backup problem"));

  const bool nominal = c.psi_vertices.size() == 1 && c.D.affine_dim() == 0 && c.D.vertices()[0].norm() == 0.0;
  Tracker dec("nominal_decrease", tol.decrease);
  if (nominal) {
    for (std::size_t t = 1; t < tr.steps.size(); ++t) dec.add(tr.steps[t].t, tr.steps[t].cost - tr.steps[t - 1].cost);
    out.push_back(dec.done("J*_{t+1} <= J*_t"));
  } else {
    InvariantResult r;
    r.name = "nominal_decrease";
    r.status = InvariantResult::Status::Skip;
    r.detail = "needs D = {0} and a single parameter in Psi_0";
    out.push_back(r);
  }
  return out;
}

bool all_passed(const std::vector<InvariantResult>& results) {
  return std::none_of(results.begin(), results.end(),
                      [](const InvariantResult& r) { return r.status == InvariantResult::Status::Fail; });
}

}  // namespace atmpc
