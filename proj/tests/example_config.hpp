#pragma once

#include "atmpc/sim.hpp"
#include "example_data.hpp"

namespace example {

inline atmpc::PlantConfig plant_config() {
  atmpc::PlantConfig pc;
  const Mat t = psi_true();
  pc.A_true = t.leftCols(2);
  pc.B_true = t.rightCols(1);
  atmpc::ControllerConfig& c = pc.controller;
  c.X = X();
  c.U = U();
  c.D = D();
  c.psi_vertices = psi_vertices();
  c.psi_hat0 = psi_mean();
  c.Q = Q();
  c.R = R();
  c.N = 10;
  c.kappa = 0.9;
  pc.x0 = x0();
  pc.T_steps = 60;
  pc.seed = 0;
  return pc;
}

// Known plant, no disturbance: the nominal MPC reference setting.
inline atmpc::PlantConfig nominal_config() {
  atmpc::PlantConfig pc = plant_config();
  pc.controller.D = atmpc::Polytope::point(Vec::Zero(2));
  pc.controller.psi_vertices = {psi_true()};
  pc.controller.psi_hat0 = psi_true();
  pc.policy = atmpc::DisturbancePolicy::Zero;
  return pc;
}

}  // namespace example
