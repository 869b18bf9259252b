// atmpc: run, check and compare adaptive tube MPC experiments from a JSON config.

#include <algorithm>
#include <cstdio>
#include <future>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "atmpc/checks.hpp"
#include "atmpc/config.hpp"
#include "atmpc/trace_io.hpp"

using namespace atmpc;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kConfig = 1, kInfeasible = 2, kBroken = 3 };

struct Options {
  std::string config;
  std::string out;
  std::string seeds;
  std::string mode;
};

int exit_for(const RunTrace& tr) {
  switch (tr.status) {
    case RunStatus::Completed: return kOk;
    case RunStatus::InitiallyInfeasible: return kInfeasible;
    case RunStatus::BrokenInvariant:
    case RunStatus::ModelFalsified: return kBroken;
  }
  return kBroken;
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    long long v = -1;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || v < 0) throw std::invalid_argument("--seeds: '" + item + "' is not a non-negative integer");
    out.push_back(static_cast<std::uint64_t>(v));
  }
  if (out.empty()) throw std::invalid_argument("--seeds: empty list");
  return out;
}

// Loads the config and applies the command line overrides.
ExperimentConfig load(const Options& o) {
  ExperimentConfig c = load_config(o.config);
  if (!o.out.empty()) c.out_dir = o.out;
  if (!o.seeds.empty()) c.seeds = parse_seeds(o.seeds);
  if (!o.mode.empty()) c.modes = {parse_mode(o.mode)};
  return c;
}

// All (mode, seed) runs; independent, so they run concurrently.
std::vector<RunTrace> run_all(const ExperimentConfig& c, std::uint64_t seed) {
  std::vector<std::future<RunTrace>> jobs;
  const PlantConfig pc = c.plant_config(seed);
  for (Mode m : c.modes) jobs.push_back(std::async(std::launch::async, [pc, m] { return run_closed_loop(pc, m); }));
  std::vector<RunTrace> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

fs::path run_dir(const ExperimentConfig& c, const RunTrace& tr) {
  return fs::path(c.out_dir) / to_string(tr.mode) / ("seed_" + std::to_string(tr.seed));
}

void print_summary(const RunTrace& tr, int T) {
  std::printf("%-8s seed=%-4llu %3zu/%d feasible steps  final |x|=%.4g  total cost=%.6g  violations=%d  %s%s%s\n",
              to_string(tr.mode), static_cast<unsigned long long>(tr.seed), tr.steps.size(), T,
              tr.states.empty() ? 0.0 : tr.states.back().norm(), tr.total_cost(), tr.constraint_violations,
              to_string(tr.status), tr.message.empty() ? "" : ": ", tr.message.c_str());
}

void diagnose(const RunTrace& tr) {
  if (tr.status == RunStatus::ModelFalsified)
    std::fprintf(stderr,
                 "EmptyResult: no parameter in the uncertainty set explains the measurements (mode %s, seed %llu); "
                 "the disturbance bound or the parameter set does not cover the plant\n",
                 to_string(tr.mode), static_cast<unsigned long long>(tr.seed));
  else if (tr.status != RunStatus::Completed)
    std::fprintf(stderr, "%s (mode %s, seed %llu): %s\n", to_string(tr.status), to_string(tr.mode),
                 static_cast<unsigned long long>(tr.seed), tr.message.c_str());
}

int cmd_run(const ExperimentConfig& c) {
  int code = kOk;
  for (std::uint64_t seed : c.seeds)
    for (const RunTrace& tr : run_all(c, seed)) {
      write_run(run_dir(c, tr), tr);
      print_summary(tr, c.T_steps);
      diagnose(tr);
      code = std::max(code, exit_for(tr));
    }
  return code;
}

int cmd_check(const ExperimentConfig& c) {
  int code = kOk;
  for (std::uint64_t seed : c.seeds) {
    const PlantConfig pc = c.plant_config(seed);
    for (const RunTrace& tr : run_all(c, seed)) {
      write_run(run_dir(c, tr), tr);
      std::printf("== %s seed=%llu (%s)\n", to_string(tr.mode), static_cast<unsigned long long>(seed),
                  to_string(tr.status));
      diagnose(tr);
      const auto results = check_invariants(tr, pc, c.tol);
      for (const auto& r : results)
        std::printf("  %-4s %-26s worst=%-11.3g %s\n", to_string(r.status), r.name.c_str(), r.worst, r.detail.c_str());
      code = std::max(code, exit_for(tr));
      if (!all_passed(results)) code = std::max(code, static_cast<int>(kBroken));
    }
  }
  return code;
}

int cmd_compare(const ExperimentConfig& c) {
  if (c.modes.size() < 2) {
    std::fprintf(stderr, "compare needs at least two modes (got %zu)\n", c.modes.size());
    return kConfig;
  }
  int code = kOk;
  const fs::path table = fs::path(c.out_dir) / "comparison.csv";
  fs::create_directories(c.out_dir);
  bool first = true;
  for (std::uint64_t seed : c.seeds) {
    const PlantConfig pc = c.plant_config(seed);
    const std::vector<RunTrace> traces = run_all(c, seed);
    for (const RunTrace& tr : traces) {
      write_run(run_dir(c, tr), tr);
      print_summary(tr, c.T_steps);
      diagnose(tr);
      code = std::max(code, exit_for(tr));
    }
    if (traces.front().steps.empty()) continue;
    const ComparisonReport rep = compare_runs(traces, &pc);
    write_comparison_csv(table, rep, seed, !first);
    first = false;
    std::printf("%-8s %-8s %6s %14s %14s %-22s %14s\n", "a", "b", "seed", "cost_a", "cost_b", "ordering", "contain_t1");
    for (std::size_t k = 0; k < rep.summary.size(); ++k) {
      const ComparisonRow& s = rep.summary[k];
      double at1 = std::numeric_limits<double>::quiet_NaN();
      for (const auto& r : rep.rows)
        if (r.mode_b == s.mode_b && r.t == 1) at1 = std::isnan(r.same_state_containment) ? r.section_containment : r.same_state_containment;
      const std::string order = s.mode_a + (s.cumulative_cost_a <= s.cumulative_cost_b ? " <= " : " > ") + s.mode_b;
      std::printf("%-8s %-8s %6llu %14.6g %14.6g %-22s %14.3g\n", s.mode_a.c_str(), s.mode_b.c_str(),
                  static_cast<unsigned long long>(seed), s.cumulative_cost_a, s.cumulative_cost_b, order.c_str(), at1);
    }
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive tube MPC experiments"};
  app.require_subcommand(1);
  Options opt;
  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "experiment config (JSON)")->required();
    sub->add_option("--out", opt.out, "output directory (overrides run.out_dir)");
    sub->add_option("--seeds", opt.seeds, "comma-separated seeds (overrides run.seeds)");
    sub->add_option("--mode", opt.mode, "single mode: adaptive, reach or robust (overrides run.modes)")
        ->check(CLI::IsMember({"adaptive", "reach", "robust"}));
    return sub;
  };
  CLI::App* run = add("run", "run every listed mode and seed, write traces");
  CLI::App* check = add("check", "run and evaluate the invariant suite");
  CLI::App* compare = add("compare", "run at least two modes and tabulate costs, volumes and tube containment");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  ExperimentConfig cfg;
  try {
    cfg = load(opt);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  }

  try {
    if (*run) return cmd_run(cfg);
    if (*check) return cmd_check(cfg);
    if (*compare) return cmd_compare(cfg);
  } catch (const ControllerError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return e.kind() == ControllerError::Kind::InitiallyInfeasible ? kInfeasible : kBroken;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBroken;
  }
  return kOk;
}
