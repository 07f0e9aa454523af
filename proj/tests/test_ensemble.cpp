#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "flock/ensemble.hpp"
#include "flock/error.hpp"

using namespace flock;

namespace {

Ensemble random_1d(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> U(-2.0, 3.0), W(0.1, 1.0);
  std::vector<double> x(n), v(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = U(rng);
    v[i] = U(rng);
    w[i] = W(rng);
  }
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& q : w) q /= s;
  // renormalize the last weight so the sum is within 1e-12
  double rest = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) rest += w[i];
  w.back() = 1.0 - rest;
  return Ensemble(1, x, v, w);
}

// Brute-force W1 between two 1D weighted marginals: ∫|F_a − F_b| over the merged grid.
double w1_bruteforce(const std::vector<double>& xa, const std::vector<double>& wa,
                     const std::vector<double>& xb, const std::vector<double>& wb) {
  std::vector<double> grid = xa;
  grid.insert(grid.end(), xb.begin(), xb.end());
  std::sort(grid.begin(), grid.end());
  auto cdf = [](const std::vector<double>& x, const std::vector<double>& w, double t) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] <= t) s += w[i];
    return s;
  };
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k)
    total += std::abs(cdf(xa, wa, grid[k]) - cdf(xb, wb, grid[k])) * (grid[k + 1] - grid[k]);
  return total;
}

}  // namespace

TEST_CASE("ensemble validation") {
  CHECK_THROWS_AS(Ensemble(0, {}, {}, {}), DomainError);
  CHECK_THROWS_AS(Ensemble(1, {}, {}, {}), DomainError);
  CHECK_THROWS_AS(Ensemble(1, {0.0, 1.0}, {0.0}, {0.5, 0.5}), DomainError);
  CHECK_THROWS_AS(Ensemble(1, {0.0, 1.0}, {0.0, 1.0}, {0.6, 0.6}), DomainError);
  CHECK_THROWS_AS(Ensemble(1, {0.0, 1.0}, {0.0, 1.0}, {1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(Ensemble(1, {0.0, INFINITY}, {0.0, 1.0}, {0.5, 0.5}), DomainError);
  CHECK_THROWS_AS(Ensemble(2, {0.0, 1.0, 2.0}, {0.0, 1.0, 2.0}, {0.5, 0.5}), DomainError);
  const auto e = Ensemble::uniform_weights(2, {0, 0, 1, 1}, {0, 0, 2, 2});
  CHECK(e.size() == 2);
  CHECK(e.max_weight() == 0.5);
  CHECK_THROWS_AS(e.with_state({0.0}, {0.0}), DomainError);
}

TEST_CASE("support box and normalization") {
  const auto e = Ensemble::uniform_weights(2, {1, 5, 3, -1, 2, 2}, {0.5, 2, 1.5, 1, 1, 3});
  const auto b = support_box(e);
  CHECK(b.Y(0) == 2.0);
  CHECK(b.Y(1) == 6.0);
  CHECK(b.W(0) == 1.0);
  CHECK(b.W(1) == 2.0);
  CHECK(b.a(0) == 0.0);
  const auto n = normalize(e, b.frame);
  const auto bn = support_box(n);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(bn.axes[j].x_lo == 0.0);
    CHECK(bn.axes[j].v_lo == 0.0);
    CHECK(bn.Y(j) == b.Y(j));
  }
}

TEST_CASE("moving frame shifts positions with the velocity offset") {
  Frame f{{1.0}, {2.0}, 3.0};
  CHECK(f.x_at(0, 5.0, 3.0) == 4.0);
  CHECK(f.x_at(0, 5.0, 4.0) == 2.0);
  CHECK(f.v_at(0, 2.5) == 0.5);
}

TEST_CASE("metrics: Lambda bounded by V squared, zero iff aligned") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const auto e = random_1d(rng, 30);
    const auto m = flocking_metrics(e);
    CHECK(m.Lambda <= m.V * m.V * (1.0 + 1e-14));
    CHECK(m.Lambda > 0.0);
  }
  const auto e = Ensemble::uniform_weights(1, {0.0, 1.0, 4.0}, {0.3, 0.3, 0.3});
  const auto m = flocking_metrics(e);
  CHECK(m.Lambda <= 1e-14);
  CHECK(m.V <= 1e-14);
  CHECK(m.X == doctest::Approx(4.0 - 5.0 / 3.0));
}

TEST_CASE("quantile cuts cover the slab and respect the target") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 40; ++rep) {
    const auto e = random_1d(rng, 57);
    const double c = 0.2 + 0.05 * (rep % 7);
    const std::size_t n = static_cast<std::size_t>(std::ceil(2.0 / c));
    const double target = 1.0 / static_cast<double>(n);
    const auto q = mass_quantile_cuts(e, 0, target, n);
    const auto b = support_box(e);
    REQUIRE(q.cuts.size() == n + 1);
    CHECK(q.cuts.front() == b.axes[0].x_lo);
    CHECK(q.cuts.back() == b.axes[0].x_hi);
    CHECK(std::is_sorted(q.cuts.begin(), q.cuts.end()));
    double total = 0.0;
    for (double m : q.slice_mass) total += m;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i + 1 < q.slice_mass.size(); ++i) {
      if (q.slice_mass[i] == 0.0) continue;  // exhausted before the last slice
      CHECK(q.slice_mass[i] >= target - 1e-12);
      CHECK(q.slice_mass[i] <= target + e.max_weight() + 1e-12);
    }
  }
}

TEST_CASE("quantile cuts flag heavy atoms and reject impossible targets") {
  const auto e = Ensemble(1, {0.0, 1.0, 2.0}, {0, 0, 0}, {0.8, 0.1, 0.1});
  const auto q = mass_quantile_cuts(e, 0, 0.5, 2);
  CHECK(q.heavy_atom);
  CHECK_THROWS_AS(mass_quantile_cuts(e, 0, 0.2, 2), DomainError);
  CHECK_THROWS_AS(mass_quantile_cuts(e, 0, 1.5, 2), DomainError);
}

TEST_CASE("slice mass counts closed intervals") {
  const auto e = Ensemble::uniform_weights(1, {0.0, 0.5, 1.0, 1.5}, {0, 0, 0, 0});
  CHECK(slice_mass(e, 0, 0.5, 1.0) == doctest::Approx(0.5));
  CHECK(slice_mass(e, 0, 0.51, 0.99) == 0.0);
  CHECK(slice_mass(e, 0, -5.0, 5.0) == doctest::Approx(1.0));
}

TEST_CASE("wasserstein1_1d: brute force, metric axioms") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 60; ++rep) {
    const auto a = random_1d(rng, 11 + rep % 5);
    const auto b = random_1d(rng, 7 + rep % 3);
    const auto c = random_1d(rng, 9);
    const Coordinate X{Coordinate::Position, 0}, V{Coordinate::Velocity, 0};
    const double ab = wasserstein1_1d(a, b, X);
    CHECK(ab == doctest::Approx(w1_bruteforce(a.x(), a.w(), b.x(), b.w())).epsilon(1e-12));
    CHECK(wasserstein1_1d(a, b, V) ==
          doctest::Approx(w1_bruteforce(a.v(), a.w(), b.v(), b.w())).epsilon(1e-12));
    CHECK(wasserstein1_1d(a, a, X) == 0.0);
    CHECK(ab == doctest::Approx(wasserstein1_1d(b, a, X)).epsilon(1e-14));
    CHECK(ab <= wasserstein1_1d(a, c, X) + wasserstein1_1d(c, b, X) + 1e-12);
  }
  // translation by s moves W1 by exactly |s|
  const auto a = Ensemble::uniform_weights(1, {0.0, 1.0}, {0, 0});
  const auto b = Ensemble::uniform_weights(1, {0.25, 1.25}, {0, 0});
  CHECK(wasserstein1_1d(a, b, {Coordinate::Position, 0}) == doctest::Approx(0.25));
}

TEST_CASE("samplers are seeded and stay in their boxes") {
  const auto a = sample::uniform_box(2, 100, {0, -1}, {1, 1}, {2, 2}, {3, 4}, 42);
  const auto b = sample::uniform_box(2, 100, {0, -1}, {1, 1}, {2, 2}, {3, 4}, 42);
  const auto c = sample::uniform_box(2, 100, {0, -1}, {1, 1}, {2, 2}, {3, 4}, 43);
  CHECK(a.x() == b.x());
  CHECK(a.v() == b.v());
  CHECK(a.x() != c.x());
  const auto bx = support_box(a);
  CHECK(bx.axes[1].x_lo >= -1.0);
  CHECK(bx.axes[1].v_hi <= 4.0);
  const auto g = sample::grid(1, 4, {0}, {1}, {0}, {2});
  CHECK(g.size() == 16);
  CHECK(support_box(g).axes[0].x_lo == doctest::Approx(0.125));
  CHECK(support_box(g).axes[0].v_hi == doctest::Approx(1.75));
}
