#include "doctest.h"
#include "flock/scenario.hpp"

using namespace flock;

namespace {

const char* kBase = R"({
  "schema_version": 1, "dim": 1, "particles": 80,
  "kernel": {"family": "power_law", "K": 1, "gamma": 1},
  "initial": {"type": "uniform_box", "seed": 4},
  "mode": "mass", "c": 0.5, "post_horizon": 0.5
})";

struct Replays {
  ControlPlan plan;
  Ensemble small0, big0, small1, big1;
};

Replays replay_small_and_big(std::uint64_t big_seed) {
  const auto s = validate_config(kBase);
  const auto a = run_scenario(s);
  auto plan = io::plan_from_json(io::Json::parse(a.plan_json), 1);
  auto j = io::Json::parse(kBase);
  j["particles"] = 320;
  j["initial"]["seed"] = big_seed;
  const auto big = validate_config(j);
  const auto e_small = build_ensemble(s), e_big = build_ensemble(big);
  auto t_small = integrate_until(s.kernel, e_small, plan, plan.t_end()).final_state;
  auto t_big = integrate_until(s.kernel, e_big, plan, plan.t_end()).final_state;
  return {std::move(plan), e_small, e_big, std::move(t_small), std::move(t_big)};
}

}  // namespace

// The plan is open loop and its bands are placed around the source sample's barycenter.
// A 4N resample has a barycenter offset of order 1/sqrt(N), and late bands are narrower than
// that, so the resample keeps a velocity spread near the offset.
TEST_CASE("4N resample replay keeps terminal W within 2x of the original") {
  for (std::uint64_t seed : {77, 78}) {
    const auto r = replay_small_and_big(seed);
    const double W_small = support_box(r.small1).W(0);
    const double W_big = support_box(r.big1).W(0);
    INFO("seed " << seed << ": terminal W " << W_big << " vs original " << W_small
                 << ", barycenter offset "
                 << barycenters(r.big0).vbar[0] - barycenters(r.small0).vbar[0]);
    CHECK(W_big <= 2.0 * W_small);
  }
}

TEST_CASE("4N resample replay contracts the velocity W1 gap") {
  for (std::uint64_t seed : {77, 78, 79, 80}) {
    const auto r = replay_small_and_big(seed);
    const Coordinate vel{Coordinate::Velocity, 0};
    const double before = wasserstein1_1d(r.small0, r.big0, vel);
    const double after = wasserstein1_1d(r.small1, r.big1, vel);
    INFO("seed " << seed << ": W1 " << before << " -> " << after);
    CHECK(after <= before);
  }
}
