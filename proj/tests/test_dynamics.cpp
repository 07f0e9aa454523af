#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <random>

#include "doctest.h"
#include "flock/dynamics.hpp"
#include "flock/error.hpp"

using namespace flock;

namespace {

ControlPiece band_piece(double t0, double t1, double dt) {
  ControlPiece p;
  p.t_start = t0;
  p.t_end = t1;
  p.frame = Frame{{0.0}, {0.0}, t0};
  p.force = BandForce{1.0, 1.0, 0.1};
  p.dt = dt;
  return p;
}

}  // namespace

TEST_CASE("constant kernel matches the closed-form relaxation") {
  // φ ≡ K: v_i(t) = v̄ + (v_i − v̄)e^{−Kt}, x_i(t) = x_i + v̄t + (v_i − v̄)(1 − e^{−Kt})/K
  const double K = 1.7;
  const auto k = Kernel::power_law(K, 0.0);
  const auto e = sample::uniform_box(1, 40, {0}, {1}, {-1}, {1}, 8);
  const double vbar = barycenters(e).vbar[0];
  IntegratorOptions o;
  o.dt_max = 0.01;
  const auto tr = integrate(k, e, ControlPlan{}, 3.0, o);
  const double dec = std::exp(-K * 3.0);
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double vi = vbar + (e.v(i, 0) - vbar) * dec;
    const double xi = e.x(i, 0) + vbar * 3.0 + (e.v(i, 0) - vbar) * (1.0 - dec) / K;
    CHECK(std::abs(tr.final_state.v(i, 0) - vi) < 1e-10);
    CHECK(std::abs(tr.final_state.x(i, 0) - xi) < 1e-10);
  }
  CHECK(decay_rate_estimate(tr, 0.0) == doctest::Approx(K).epsilon(1e-6));
}

TEST_CASE("two-particle power-law system against an adaptive reference") {
  using State = std::array<double, 4>;  // x1, x2, v1, v2
  const auto k = Kernel::power_law(1.0, 1.0);
  auto f = [&](const State& s, State& ds, double) {
    const double p = k(std::abs(s[1] - s[0]));
    ds[0] = s[2];
    ds[1] = s[3];
    ds[2] = 0.5 * p * (s[3] - s[2]);
    ds[3] = 0.5 * p * (s[2] - s[3]);
  };
  State s{0.0, 1.0, 1.0, -0.5};
  namespace ode = boost::numeric::odeint;
  ode::integrate_adaptive(ode::make_dense_output(1e-13, 1e-13, ode::runge_kutta_dopri5<State>()), f,
                          s, 0.0, 5.0, 1e-3);
  const auto e = Ensemble::uniform_weights(1, {0.0, 1.0}, {1.0, -0.5});
  const auto tr = integrate(k, e, ControlPlan{}, 5.0);
  CHECK(std::abs(tr.final_state.x(0, 0) - s[0]) < 1e-9);
  CHECK(std::abs(tr.final_state.x(1, 0) - s[1]) < 1e-9);
  CHECK(std::abs(tr.final_state.v(0, 0) - s[2]) < 1e-9);
  CHECK(std::abs(tr.final_state.v(1, 0) - s[3]) < 1e-9);
}

TEST_CASE("uncontrolled invariants: conserved mean, shrinking velocity box") {
  const Kernel ks[] = {Kernel::power_law(1.0, 1.0), Kernel::exponential(1.0, 2.0),
                       Kernel::power_law(1.0, 0.3)};
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    for (const auto& k : ks) {
      const auto e = sample::uniform_box(2, 50, {0, 0}, {2, 1}, {-1, 0}, {1, 0.5}, seed);
      const auto vb0 = barycenters(e).vbar;
      const auto b0 = support_box(e);
      const auto tr = integrate(k, e, ControlPlan{}, 2.0);
      double prevV = tr.samples.front().metrics.V;
      for (const auto& s : tr.samples) {
        CHECK(s.metrics.V <= prevV + 1e-10);
        prevV = s.metrics.V;
        for (std::size_t q = 0; q < 2; ++q) {
          CHECK(std::abs(s.metrics.vbar[q] - vb0[q]) < 1e-12);
          CHECK(s.box[q].v_lo >= b0.axes[q].v_lo - 1e-12);
          CHECK(s.box[q].v_hi <= b0.axes[q].v_hi + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("forward then backward returns the initial state") {
  const auto k = Kernel::power_law(1.0, 1.0);
  const auto e = sample::uniform_box(1, 30, {0}, {1}, {0}, {1}, 3);
  const auto fw = integrate(k, e, ControlPlan{}, 1.0);
  IntegratorOptions o;
  o.t_start = 1.0;
  const auto bw = integrate(k, fw.final_state, ControlPlan{}, -1.0, o);
  for (std::size_t i = 0; i < e.size(); ++i) {
    CHECK(std::abs(bw.final_state.x(i, 0) - e.x(i, 0)) < 1e-10);
    CHECK(std::abs(bw.final_state.v(i, 0) - e.v(i, 0)) < 1e-10);
  }
  CHECK(bw.samples.back().t == 0.0);
}

TEST_CASE("piece boundaries are hit exactly and sampled") {
  ControlPlan plan;
  plan.append(band_piece(0.0, 0.137, 0.01));
  plan.append(band_piece(0.137, 0.3, 0.007));
  const auto e = sample::uniform_box(1, 20, {0}, {1}, {0}, {1}, 5);
  IntegratorOptions o;
  o.sample_stride = 0;
  o.dt_max = 0.05;
  const auto tr = integrate(Kernel::power_law(1.0, 1.0), e, plan, 0.5, o);
  std::vector<double> ts;
  for (const auto& s : tr.samples) ts.push_back(s.t);
  REQUIRE(ts.size() == 4);
  CHECK(ts[0] == 0.0);
  CHECK(ts[1] == 0.137);
  CHECK(ts[2] == 0.3);
  CHECK(ts[3] == 0.5);
  CHECK(tr.samples[1].piece_index == 0);
  CHECK(tr.samples[3].piece_index == -1);
  // 14 + 24 controlled steps, then 4 free steps of at most 0.05
  CHECK(tr.rk_steps == 14 + 24 + 4);
  CHECK(tr.worst.omega_volume == doctest::Approx(plan.pieces()[0].volume()));
}

TEST_CASE("control changes the trajectory only while active") {
  ControlPlan plan;
  plan.append(band_piece(0.2, 0.4, 0.01));
  const auto e = sample::uniform_box(1, 25, {0}, {1}, {0}, {1}, 6);
  const auto k = Kernel::power_law(1.0, 1.0);
  IntegratorOptions o;
  o.sample_stride = 1;
  const auto a = integrate(k, e, plan, 0.2, o);
  const auto b = integrate(k, e, ControlPlan{}, 0.2, o);
  CHECK(a.final_state.x() == b.final_state.x());
  CHECK(a.final_state.v() == b.final_state.v());
  const auto c = integrate(k, e, plan, 0.4, o);
  const auto d = integrate(k, e, ControlPlan{}, 0.4, o);
  CHECK(c.final_state.v() != d.final_state.v());
  CHECK(c.worst.u_sup <= 1.0);
}

TEST_CASE("integration errors and argument checks") {
  const auto k = Kernel::power_law(1.0, 0.0);
  const auto e = Ensemble::uniform_weights(1, {0.0, 1.0}, {1e308, -1e308});
  CHECK_THROWS_AS(integrate(k, e, ControlPlan{}, 1.0), IntegrationError);
  try {
    integrate(k, e, ControlPlan{}, 1.0);
  } catch (const IntegrationError& err) {
    CHECK(err.last_x().size() == 2);
    CHECK(std::isfinite(err.last_v()[0]));
  }
  const auto ok = Ensemble::uniform_weights(1, {0.0, 1.0}, {0.0, 1.0});
  ControlPlan plan;
  plan.append(band_piece(0.0, 1.0, 0.1));
  CHECK_THROWS_AS(integrate(k, ok, plan, -1.0), DomainError);
  IntegratorOptions bad;
  bad.dt_max = 0.0;
  CHECK_THROWS_AS(integrate(k, ok, ControlPlan{}, 1.0, bad), DomainError);
}

TEST_CASE("decay rate fit edge cases") {
  const auto aligned = Ensemble::uniform_weights(1, {0.0, 1.0}, {0.5, 0.5});
  const auto tr = integrate(Kernel::power_law(1.0, 1.0), aligned, ControlPlan{}, 1.0);
  CHECK(decay_rate_estimate(tr, 0.0) == 0.0);
  const auto e = Ensemble::uniform_weights(1, {0.0, 1.0}, {0.0, 1.0});
  IntegratorOptions o;
  o.sample_stride = 0;
  const auto few = integrate(Kernel::power_law(1.0, 1.0), e, ControlPlan{}, 1.0, o);
  CHECK_THROWS_AS(decay_rate_estimate(few, 0.0), DomainError);
}
