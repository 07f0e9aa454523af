#include "flock/flocking.hpp"

#include <cmath>
#include <limits>

#include "flock/error.hpp"

namespace flock {

double solve_X_M(const Kernel& k, double X0, double V0) {
  if (!(X0 >= 0.0) || !(V0 >= 0.0)) throw DomainError("solve_X_M: radii must be nonnegative");
  if (V0 == 0.0) return X0;
  double lo = X0;
  double step = 1.0;
  double hi = X0 + step;
  while (segment_integral(k, X0, hi) < V0) {
    lo = hi;
    step *= 2.0;
    hi = X0 + step;
    if (!std::isfinite(hi) || step > 1e300)
      throw DomainError("solve_X_M: tail exhausted before reaching V0");
  }
  while (hi - lo > 1e-10 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (segment_integral(k, X0, mid) < V0)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

FlockingVerdict theorem3_test(const Kernel& k, double X0, double V0) {
  const auto tail = tail_integral(k, X0);
  FlockingVerdict out{V0 < tail.value, tail.value, tail.value - V0, std::nullopt};
  if (out.in_region) out.X_M = solve_X_M(k, X0, V0);
  return out;
}

FlockingVerdict theorem3_test(const Kernel& k, const Ensemble& e) {
  const auto m = flocking_metrics(e);
  return theorem3_test(k, m.X, m.V);
}

FlockingVerdict corollary2_test(const Kernel& k, double X_tilde, double V_tilde) {
  if (!(X_tilde >= 0.0) || !(V_tilde >= 0.0))
    throw DomainError("corollary2_test: radii must be nonnegative");
  const auto tail = tail_integral(k, 2.0 * X_tilde);
  return {2.0 * V_tilde <= tail.value, tail.value, tail.value - 2.0 * V_tilde, std::nullopt};
}

FlockingVerdict corollary2_test(const Kernel& k, const Ensemble& e) {
  const SupportBox b = support_box(e);
  double y2 = 0.0, w2 = 0.0;
  for (std::size_t j = 0; j < b.axes.size(); ++j) {
    y2 += b.Y(j) * b.Y(j);
    w2 += b.W(j) * b.W(j);
  }
  return corollary2_test(k, 0.5 * std::sqrt(y2), 0.5 * std::sqrt(w2));
}

bool passes_with_safety(const FlockingVerdict& v, double safety) {
  if (!(safety > 0.0) || safety > 1.0) throw DomainError("safety factor must lie in (0, 1]");
  if (!v.in_region) return false;
  if (std::isinf(v.threshold)) return true;
  const double tested = v.threshold - v.margin;
  return tested <= safety * v.threshold;
}

FlockingVerdict finite_dim_test(const Kernel& k, const Ensemble& e) {
  const auto b = barycenters(e);
  const std::size_t d = e.dim();
  double gamma = 0.0, lambda = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    double dx2 = 0.0, dv2 = 0.0;
    for (std::size_t q = 0; q < d; ++q) {
      const double dx = e.x(i, q) - b.xbar[q];
      const double dv = e.v(i, q) - b.vbar[q];
      dx2 += dx * dx;
      dv2 += dv * dv;
    }
    gamma += e.w(i) * dx2;
    lambda += e.w(i) * dv2;
  }
  // ∫_Γ^∞ φ(x)dx = 2 ∫_{Γ/2}^∞ φ(2y)dy
  const auto tail = tail_integral(k, 0.5 * gamma);
  const double thr = tail.divergent ? std::numeric_limits<double>::infinity() : 2.0 * tail.value;
  return {lambda < thr, thr, thr - lambda, std::nullopt};
}

}  // namespace flock
