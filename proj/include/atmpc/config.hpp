#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "atmpc/sim.hpp"

namespace atmpc {

/// A polytope as written in a config file: a box, an H-representation or a
/// vertex list.  Kept in its written form so configs round-trip exactly.
struct PolytopeSpec {
  enum class Kind { Box, HRep, Vertices };
  Kind kind = Kind::Box;
  Vec lower, upper;
  Mat A;
  Vec b;
  std::vector<Vec> vertices;

  Polytope build() const;
  static PolytopeSpec box(const Vec& lower, const Vec& upper);
  bool operator==(const PolytopeSpec& o) const;
};

/// Tolerances of the invariant suite run by `check` and reported per step.
struct Tolerances {
  double containment = 1e-7;  // x_{t+1} in section 1 of the tube at t
  double candidate = 1e-6;    // shifted-candidate constraint residual
  double nested = 1e-8;       // Psi_{t+1} inside Psi_t, truth inside Psi_t
  double invariance = 1e-7;   // RPI and terminal inclusions
  double decrease = 1e-6;     // J*_{t+1} <= J*_t under the nominal setting
  bool operator==(const Tolerances&) const = default;
};

struct ExperimentConfig {
  Mat A_true, B_true;
  std::optional<PolytopeSpec> D_true;  // plant disturbance set, D when absent
  PolytopeSpec X, U, D;
  std::vector<Mat> psi_vertices;
  std::optional<Mat> psi_hat0;  // vertex mean when absent
  int L_max = 16;

  int N = 10;
  Mat Q, R;
  double kappa = 0.9;
  bool enforce_reach_inclusion = false;
  bool reuse_previous_on_infeasible = false;
  bool check_candidate = true;

  SynthesisOptions synthesis;

  Vec x0;
  int T_steps = 60;
  std::vector<std::uint64_t> seeds{0};
  DisturbancePolicy policy = DisturbancePolicy::UniformInD;
  std::vector<Mode> modes{Mode::Adaptive};
  std::string out_dir = "out";

  Tolerances tol;

  Mat initial_estimate() const;
  PlantConfig plant_config(std::uint64_t seed) const;
};

class ConfigError : public std::runtime_error {
 public:
  /// line is 1-based, 0 when unknown.
  ConfigError(const std::string& source, int line, const std::string& path, const std::string& what);
  int line() const noexcept { return line_; }
  const std::string& path() const noexcept { return path_; }

 private:
  int line_;
  std::string path_;
};

/// Strict parse: unknown keys, missing required keys and wrong types are
/// errors, and the result is checked against the PlantConfig invariants.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Pretty JSON that parse_config reads back to an equal config.
std::string dump_config(const ExperimentConfig& cfg);

bool same_config(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace atmpc
