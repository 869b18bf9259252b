#include "atmpc/trace_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "atmpc/polytope_json.hpp"
#include "json.hpp"

namespace atmpc {

using nlohmann::json;

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

json mat(const Mat& M) {
  json a = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) a.push_back(vec(M.row(i).transpose()));
  return a;
}

json poly(const Polytope& p) { return polytope_to_json(p); }

std::ofstream open(const std::filesystem::path& file, bool append = false) {
  std::ofstream out(file, append ? std::ios::app : std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out.precision(17);
  return out;
}

std::string csv(double v) {
  if (!std::isfinite(v)) return "nan";
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace

std::string step_record_json(const StepRecord& r) {
  json j;
  j["t"] = r.t;
  j["x"] = vec(r.x);
  j["u"] = vec(r.u);
  j["J"] = num(r.cost);
  j["stage_cost"] = num(r.stage_cost);
  j["backup_flag"] = r.backup;
  j["fast_path"] = r.fast_path;
  j["refinement_only"] = r.refinement_only;
  j["verdict"] = r.verdict;
  j["solver"] = {{"status", r.solver_status}, {"iterations", r.solver_iterations}, {"residual", num(r.solver_residual)}};
  j["candidate_residual"] = num(r.candidate_residual);
  j["containment_violation"] = num(r.containment_violation);
  j["estimator_energy"] = num(r.estimator_energy);
  j["psi_hat"] = mat(r.psi_hat);
  j["K"] = mat(r.gains.K);
  j["P"] = mat(r.gains.P);
  j["volumes"] = {{"psi", num(r.psi_volume)}, {"S", num(r.shape_volume)}, {"X_TS", num(r.terminal_volume)}};
  j["sets"] = "sets/" + std::to_string(r.t) + ".json";
  return j.dump();
}

std::string step_sets_json(const StepRecord& r) {
  json j;
  j["t"] = r.t;
  json psi = json::array();
  for (const auto& v : r.psi_set.vertex_matrices()) psi.push_back(mat(v));
  j["psi_vertices"] = psi;
  j["S"] = poly(r.data.shape.S);
  j["X_TS"] = poly(r.data.terminal.X_TS);
  j["W_global"] = poly(r.data.dist.W_global);
  json ws = json::array();
  for (const auto& w : r.data.dist.W_step) ws.push_back(poly(w));
  j["W_step"] = ws;
  json tube = json::array();
  for (int i = 0; i <= r.tube.horizon(); ++i) {
    json z = json::array();
    for (const auto& v : r.tube.section_vertices(i, r.data.shape.S)) z.push_back(vec(v));
    tube.push_back({{"alpha", vec(r.tube.alpha[i])}, {"beta", num(r.tube.beta[i])}, {"vertices", z}});
  }
  j["tube"] = tube;
  return j.dump(1);
}

std::string run_summary_json(const RunTrace& tr) {
  json j;
  j["mode"] = to_string(tr.mode);
  j["seed"] = tr.seed;
  j["status"] = to_string(tr.status);
  j["message"] = tr.message;
  j["steps"] = tr.steps.size();
  j["constraint_violations"] = tr.constraint_violations;
  j["total_cost"] = num(tr.total_cost());
  j["final_state"] = tr.states.empty() ? json(nullptr) : vec(tr.states.back());
  int backups = 0;
  for (const auto& s : tr.steps) backups += s.backup;
  j["backup_steps"] = backups;
  return j.dump(2) + "\n";
}

std::string metrics_header(int m) {
  std::string h = "t,x_norm";
  for (int k = 0; k < m; ++k) h += m == 1 ? ",u" : ",u" + std::to_string(k);
  return h + ",stage_cost,cumulative_cost,psi_volume,S_volume,X_TS_volume,backup_flag";
}

void write_run(const std::filesystem::path& dir, const RunTrace& tr) {
  std::filesystem::create_directories(dir / "sets");
  auto trace = open(dir / "trace.jsonl");
  auto metrics = open(dir / "metrics.csv");
  const int m = tr.steps.empty() ? 1 : static_cast<int>(tr.steps.front().u.size());
  metrics << metrics_header(m) << "\n";
  for (std::size_t t = 0; t < tr.steps.size(); ++t) {
    const StepRecord& r = tr.steps[t];
    trace << step_record_json(r) << "\n";
    metrics << r.t << "," << csv(r.x.norm());
    for (Eigen::Index k = 0; k < r.u.size(); ++k) metrics << "," << csv(r.u(k));
    metrics << "," << csv(r.stage_cost) << "," << csv(tr.cumulative_cost[t]) << "," << csv(r.psi_volume) << ","
            << csv(r.shape_volume) << "," << csv(r.terminal_volume) << "," << (r.backup ? 1 : 0) << "\n";
    open(dir / "sets" / (std::to_string(r.t) + ".json")) << step_sets_json(r) << "\n";
  }
  open(dir / "summary.json") << run_summary_json(tr);
}

void write_comparison_csv(const std::filesystem::path& file, const ComparisonReport& rep, std::uint64_t seed,
                          bool append) {
  const bool header = !append || !std::filesystem::exists(file) || std::filesystem::file_size(file) == 0;
  auto out = open(file, append);
  if (header)
    out << "seed,t,mode_a,mode_b,cumulative_cost_a,cumulative_cost_b,cost_delta,psi_volume_a,psi_volume_b,"
           "S_volume_a,S_volume_b,X_TS_volume_a,X_TS_volume_b,section_containment,same_state_containment,"
           "feasible_a,feasible_b\n";
  for (const auto& r : rep.rows)
    out << seed << "," << r.t << "," << r.mode_a << "," << r.mode_b << "," << csv(r.cumulative_cost_a) << ","
        << csv(r.cumulative_cost_b) << "," << csv(r.cumulative_cost_a - r.cumulative_cost_b) << ","
        << csv(r.psi_volume_a) << "," << csv(r.psi_volume_b) << "," << csv(r.shape_volume_a) << ","
        << csv(r.shape_volume_b) << "," << csv(r.terminal_volume_a) << "," << csv(r.terminal_volume_b) << ","
        << csv(r.section_containment) << "," << csv(r.same_state_containment) << "," << r.feasible_a << ","
        << r.feasible_b << "\n";
}

}  // namespace atmpc
