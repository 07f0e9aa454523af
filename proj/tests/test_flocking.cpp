#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "flock/dynamics.hpp"
#include "flock/error.hpp"
#include "flock/flocking.hpp"

using namespace flock;

TEST_CASE("X_M closed forms") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> X(0.0, 2.0), F(0.05, 0.95);
  for (int i = 0; i < 200; ++i) {
    const double X0 = X(rng);
    {
      const auto k = Kernel::power_law(1.0, 1.0);
      const double V0 = F(rng) * tail_integral(k, X0).value;
      const double ref = 0.5 * std::tan(2.0 * V0 + std::atan(2.0 * X0));
      CHECK(solve_X_M(k, X0, V0) == doctest::Approx(ref).epsilon(1e-9));
    }
    {
      const double K = 1.5, lam = 0.8;
      const auto k = Kernel::exponential(K, lam);
      const double V0 = F(rng) * tail_integral(k, X0).value;
      const double ref = -std::log(std::exp(-2.0 * lam * X0) - 2.0 * lam * V0 / K) / (2.0 * lam);
      CHECK(solve_X_M(k, X0, V0) == doctest::Approx(ref).epsilon(1e-9));
    }
  }
  CHECK(solve_X_M(Kernel::power_law(1.0, 1.0), 0.7, 0.0) == 0.7);
  CHECK_THROWS_AS(solve_X_M(Kernel::power_law(1.0, 1.0), 0.0, 10.0), DomainError);
}

TEST_CASE("radius test verdicts") {
  const auto k = Kernel::power_law(1.0, 1.0);
  const double thr = tail_integral(k, 0.5).value;
  const auto in = theorem3_test(k, 0.5, 0.5 * thr);
  CHECK(in.in_region);
  CHECK(in.threshold == thr);
  CHECK(in.margin == doctest::Approx(0.5 * thr));
  REQUIRE(in.X_M);
  CHECK(segment_integral(k, 0.5, *in.X_M) == doctest::Approx(0.5 * thr).epsilon(1e-8));
  const auto edge = theorem3_test(k, 0.5, thr);  // strict inequality
  CHECK_FALSE(edge.in_region);
  CHECK_FALSE(edge.X_M);
  const auto heavy = theorem3_test(Kernel::power_law(1.0, 0.4), 100.0, 1e6);
  CHECK(heavy.in_region);
  CHECK(std::isinf(heavy.threshold));
}

TEST_CASE("box test uses a non-strict inequality") {
  const auto k = Kernel::exponential(1.0, 1.0);
  const double thr = tail_integral(k, 2.0 * 0.3).value;
  CHECK(corollary2_test(k, 0.3, 0.5 * thr).in_region);
  CHECK_FALSE(corollary2_test(k, 0.3, 0.5 * thr * (1.0 + 1e-12)).in_region);
  CHECK_THROWS_AS(corollary2_test(k, -0.1, 0.1), DomainError);
}

TEST_CASE("box test from the support box half diagonals") {
  const auto k = Kernel::power_law(1.0, 1.0);
  const auto e = Ensemble::uniform_weights(2, {0, 0, 3, 4}, {0, 0, 0.6, 0.8});
  const auto v = corollary2_test(k, e);
  const auto ref = corollary2_test(k, 2.5, 0.5);
  CHECK(v.in_region == ref.in_region);
  CHECK(v.margin == doctest::Approx(ref.margin));
}

TEST_CASE("safety factor scales the threshold") {
  const auto k = Kernel::power_law(1.0, 1.0);
  const double thr = tail_integral(k, 1.0).value;
  const auto v = corollary2_test(k, 0.5, 0.5 * 0.995 * thr);
  CHECK(v.in_region);
  CHECK(passes_with_safety(v, 1.0));
  CHECK_FALSE(passes_with_safety(v, 0.99));
  CHECK(passes_with_safety(corollary2_test(k, 0.5, 0.5 * 0.98 * thr), 0.99));
  CHECK_THROWS_AS(passes_with_safety(v, 0.0), DomainError);
  CHECK(passes_with_safety(corollary2_test(Kernel::power_law(1.0, 0.2), 5.0, 9.0), 0.5));
}

TEST_CASE("finite-dimensional test with weighted moments") {
  const auto k = Kernel::power_law(1.0, 1.0);
  const auto e = Ensemble(1, {0.0, 2.0}, {0.0, 1.0}, {0.75, 0.25});
  // x̄ = 0.5, Γ = 0.75·0.25 + 0.25·2.25 = 0.75; v̄ = 0.25, Λ = 0.75·0.0625 + 0.25·0.5625 = 0.1875
  const auto v = finite_dim_test(k, e);
  const double thr = M_PI / 2.0 - std::atan(0.75);
  CHECK(v.threshold == doctest::Approx(thr).epsilon(1e-12));
  CHECK(v.margin == doctest::Approx(thr - 0.1875).epsilon(1e-12));
  CHECK(v.in_region);
}

TEST_CASE("certified ensembles stay inside X_M and decay") {
  const auto k = Kernel::power_law(1.0, 1.0);
  int certified = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto e = sample::uniform_box(1, 60, {0}, {0.6}, {0}, {0.2}, seed);
    const auto v = theorem3_test(k, e);
    if (!v.in_region) continue;
    ++certified;
    const auto tr = integrate(k, e, ControlPlan{}, 8.0);
    for (const auto& s : tr.samples) CHECK(s.metrics.X <= *v.X_M * (1.0 + 1e-9));
    CHECK(decay_rate_estimate(tr, 0.0) >= k(2.0 * *v.X_M) * 0.9);
  }
  CHECK(certified >= 8);
}
