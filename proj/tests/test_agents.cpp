#include "doctest.h"
#include "flock/agents.hpp"
#include "flock/control_mass.hpp"
#include "flock/dynamics.hpp"
#include "flock/error.hpp"

using namespace flock;

TEST_CASE("agent system equals the empirical-measure pathway bit for bit") {
  for (std::size_t d : {1u, 2u}) {
    const std::vector<double> lo(d, 0.0), hi(d, 1.0);
    const auto e = sample::uniform_box(d, 40, lo, hi, lo, hi, 90 + d);
    const Kernel ks[] = {Kernel::power_law(1.0, 1.0), Kernel::exponential(1.0, 1.0),
                         Kernel::power_law(0.5, 1.7)};
    for (const auto& k : ks) {
      StrategyOptions so;
      so.strict = false;
      ControlPlan plan;
      for (std::size_t step = 0; step < 3; ++step) {
        const double t = plan.empty() ? 0.0 : plan.t_end();
        const auto cur = step == 0 ? e : integrate_until(k, e, plan, t).final_state;
        plan.append(fundamental_step(k, cur, 0, 0.5, t, step, so).fragment);
      }
      const double horizon = plan.t_end() + 0.3;
      const auto tr = integrate_until(k, e, plan, horizon);
      const auto ag = evolve_agents(k, AgentSystem{d, e.x(), e.v()}, plan, 0.0, horizon, 0.01);
      CHECK(ag.x == tr.final_state.x());
      CHECK(ag.v == tr.final_state.v());
    }
  }
}

TEST_CASE("agent evolution arguments") {
  const auto k = Kernel::power_law(1.0, 1.0);
  AgentSystem s{1, {0.0, 1.0}, {0.0, 1.0}};
  CHECK_THROWS_AS(evolve_agents(k, s, ControlPlan{}, 0.0, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(evolve_agents(k, s, ControlPlan{}, 1.0, 0.0, 0.01), DomainError);
  const auto same = evolve_agents(k, s, ControlPlan{}, 0.0, 0.0, 0.01);
  CHECK(same.x == s.x);
}
