#pragma once

#include <cstddef>
#include <vector>

#include "flock/control.hpp"
#include "flock/kernel.hpp"

namespace flock {

/// N identical agents: ẋ_i = v_i, v̇_i = (1/N) Σ_j φ(‖x_j − x_i‖)(v_j − v_i) + χ_ω u.
struct AgentSystem {
  std::size_t dim;
  std::vector<double> x;  // row-major N×d
  std::vector<double> v;
  std::size_t size() const { return dim == 0 ? 0 : x.size() / dim; }
};

/// Classical RK4 with the same step layout as the kinetic integrator: every piece
/// boundary hit exactly, the last step of each interval shortened.
AgentSystem evolve_agents(const Kernel& k, AgentSystem s, const ControlPlan& plan, double t_start,
                          double t_end, double dt_max);

}  // namespace flock
