#include <cmath>
#include <random>

#include "doctest.h"
#include "flock/control_mass.hpp"
#include "flock/error.hpp"

using namespace flock;

namespace {

Ensemble unit_sample(std::size_t d, std::size_t n, std::uint64_t seed) {
  const std::vector<double> lo(d, 0.0), hi(d, 1.0);
  return sample::uniform_box(d, n, lo, hi, lo, hi, seed);
}

}  // namespace

TEST_CASE("slice count") {
  CHECK(slice_count(0.5) == 4);
  CHECK(slice_count(2.0 / 3.0) == 3);
  CHECK(slice_count(0.3) == 7);
  CHECK(slice_count(1.0) == 2);
  CHECK(slice_count(2.0) == 1);
  CHECK(slice_count(5.0) == 1);
  CHECK_THROWS_AS(slice_count(0.0), DomainError);
}

TEST_CASE("step parameters: widened slabs stay within the budget") {
  const Kernel ks[] = {Kernel::power_law(1.0, 1.0), Kernel::exponential(1.0, 2.0)};
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    for (double c : {0.25, 0.5, 0.9}) {
      const auto e = unit_sample(1, 80, seed);
      const auto p = step_params_1d(ks[seed % 2], e, c);
      REQUIRE(p.n == slice_count(c));
      REQUIRE(p.cuts.size() == p.n + 1);
      CHECK(p.target_mass == doctest::Approx(0.5 * c));
      CHECK(p.eps0 > 0.0);
      CHECK(p.eps0 <= p.Y0 + p.W0);
      CHECK(p.T0 == std::min({p.eps0 / p.W0, p.beta0 / (2.0 * c), 1.0}));
      CHECK(p.alpha0 == std::max(p.alpha_plus, p.alpha_minus));
      CHECK(p.beta0 == std::max(p.beta_plus, p.beta_minus));
      // brute force: every slab widened by 3ε holds at most c, normalized coordinates
      for (std::size_t i = 1; i <= p.n; ++i) {
        double m = 0.0;
        for (std::size_t q = 0; q < e.size(); ++q) {
          const double y = e.x(q, 0) - p.frame.x_offset[0];
          if (y >= p.cuts[i - 1] - 3.0 * p.eps0 && y <= p.cuts[i] + 3.0 * p.eps0) m += e.w(q);
        }
        CHECK(m <= c + 1e-12);
      }
    }
  }
}

TEST_CASE("pieces tile the step") {
  const auto e = unit_sample(1, 50, 2);
  const auto p = step_params_1d(Kernel::power_law(1.0, 1.0), e, 0.5);
  double t = 3.0;
  for (std::size_t i = 1; i <= p.n; ++i) {
    const auto pc = build_control_piece(p, i, 3.0, 7, 1e-3);
    CHECK(pc.t_start == doctest::Approx(t).epsilon(1e-15));
    CHECK(pc.frame.t_ref == 3.0);
    CHECK(pc.slice_index == i);
    CHECK(pc.step_index == 7);
    t = pc.t_end;
  }
  CHECK(t == doctest::Approx(3.0 + p.T0).epsilon(1e-14));
  CHECK_THROWS_AS(build_control_piece(p, 0, 0.0, 0, 1e-3), DomainError);
  CHECK_THROWS_AS(build_control_piece(p, p.n + 1, 0.0, 0, 1e-3), DomainError);
}

TEST_CASE("one step contracts the velocity support within the budget") {
  const Kernel ks[] = {Kernel::power_law(1.0, 1.0), Kernel::exponential(1.0, 1.0),
                       Kernel::power_law(2.0, 2.0)};
  for (std::uint64_t seed = 0; seed < 9; ++seed) {
    const auto e = unit_sample(1, 120, 40 + seed);
    const auto& k = ks[seed % 3];
    const double c = seed % 2 ? 0.5 : 0.3;
    const auto out = fundamental_step(k, e, 0, c, 0.0, 0);
    const auto& r = out.record;
    const auto& p = std::get<StepParams>(r.params);
    CHECK(r.contraction_ok);
    CHECK(r.constraint_ok);
    CHECK(r.drift_ok);
    CHECK(r.box_ok);
    CHECK(r.W_after[0] <= r.W_before[0] - p.T0 / static_cast<double>(p.n) + 1e-6);
    CHECK(r.max_mass_in_omega <= c + 2.0 * e.max_weight());
    CHECK(r.max_u <= 1.0);
    CHECK(out.fragment.pieces().size() == p.n);
    CHECK(out.fragment.total_time() == doctest::Approx(p.T0));
  }
}

TEST_CASE("step degeneracies") {
  const auto k = Kernel::power_law(1.0, 1.0);
  const auto flat = Ensemble::uniform_weights(1, {0.0, 1.0, 2.0}, {0.3, 0.3, 0.3});
  CHECK_THROWS_AS(fundamental_step(k, flat, 0, 0.5, 0.0, 0), AlreadyFlocked);
  const auto atom = Ensemble(1, {0.0, 1.0, 2.0}, {0.0, 0.5, 1.0}, {0.1, 0.8, 0.1});
  CHECK_THROWS_AS(step_params_1d(k, atom, 0.5), DegenerateMeasure);
  CHECK_THROWS_AS(step_params_1d(k, atom, 0.0), DomainError);
  CHECK_THROWS_AS(multi_d_params(k, atom, 1, 0.5), DomainError);
}

TEST_CASE("1D strategy reaches eta within the time and spread bounds") {
  const auto k = Kernel::power_law(1.0, 1.0);
  const auto e = unit_sample(1, 100, 5);
  const auto r = complete_strategy_1d(k, e, 0.5);
  const auto& s = r.summary;
  const auto b0 = support_box(e);
  CHECK(s.eta == doctest::Approx(eta_mass_1d(k, b0.Y(0), b0.W(0), 0.5)));
  CHECK(support_box(r.trajectory.final_state).W(0) <= s.eta);
  CHECK(s.total_time <= 4.0 * b0.W(0) + 1e-3);
  CHECK(support_box(r.trajectory.final_state).Y(0) <= b0.Y(0) + 4.0 * b0.W(0) * b0.W(0) + 1e-3);
  CHECK(s.contraction_ok);
  CHECK(s.constraint_ok);
  CHECK(s.drift_ok);
  CHECK(s.box_ok);
  CHECK(s.time_ok);
  CHECK(s.Y_ok);
  CHECK(s.terminal.in_region);
  CHECK(s.steps == r.records.size());
  CHECK(r.plan.t_end() == doctest::Approx(s.total_time));
  // steps are back to back
  for (std::size_t i = 1; i < r.records.size(); ++i)
    CHECK(r.records[i].t_start == r.records[i - 1].t_end);
}

TEST_CASE("strategy edge cases") {
  const auto k = Kernel::power_law(1.0, 1.0);
  const auto tight = sample::uniform_box(1, 50, {0}, {0.1}, {0}, {0.001}, 1);
  const auto done = complete_strategy_1d(k, tight, 0.5);
  CHECK(done.summary.steps == 0);
  CHECK(done.plan.empty());
  const auto e = unit_sample(1, 60, 3);
  StrategyOptions o;
  o.max_steps = 5;
  try {
    complete_strategy_1d(k, e, 0.5, std::nullopt, o);
    FAIL("expected the step budget to run out");
  } catch (const StrategyError& err) {
    CHECK(err.records().size() == 5);
    CHECK(err.plan().pieces().size() == 5 * slice_count(0.5));
  }
  const auto loose = complete_strategy_1d(k, e, 0.5, 0.5);
  const auto strict = complete_strategy_1d(k, e, 0.5);
  CHECK(loose.summary.steps < strict.summary.steps);
  CHECK_THROWS_AS(complete_strategy_1d(k, unit_sample(2, 10, 1), 0.5), DomainError);
}

TEST_CASE("multi-dimensional strategy controls axes in order") {
  const auto k = Kernel::power_law(1.0, 1.0);
  const auto e = unit_sample(2, 64, 12);
  const auto r = complete_strategy_multi_d(k, e, 1.0);
  const auto& s = r.summary;
  const auto b0 = support_box(e);
  CHECK(s.eta == doctest::Approx(eta_mass_multi_d(k, b0, 1.0)));
  const auto b1 = support_box(r.trajectory.final_state);
  CHECK(b1.W(0) <= s.eta + 1e-6);
  CHECK(b1.W(1) <= s.eta);
  CHECK(s.phase_order_ok);
  REQUIRE(s.phase_max_prev_W.size() == 2);
  CHECK(s.phase_max_prev_W[1] <= s.eta + 1e-6);
  CHECK(s.total_time <= 2.0 * (b0.W(0) + b0.W(1)) + 1e-3);
  CHECK(s.contraction_ok);
  CHECK(s.constraint_ok);
  // axis 0 first, then axis 1
  std::size_t last_axis = 0;
  for (const auto& rec : r.records) {
    const auto axis = std::get<StepParams>(rec.params).axis;
    CHECK(axis >= last_axis);
    last_axis = axis;
  }
  REQUIRE(s.terminal_surrogate);
  const auto one = complete_strategy_multi_d(k, unit_sample(1, 40, 2), 0.5);
  CHECK(one.summary.eta_alt.has_value());
}
