#include "flock/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "flock/error.hpp"
#include "flock/quadrature.hpp"

namespace flock {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuadRelTol = 1e-12;

void require_finite_positive(double x, const char* what) {
  if (!(std::isfinite(x) && x > 0.0)) {
    std::ostringstream os;
    os << what << " must be finite and positive, got " << x;
    throw DomainError(os.str());
  }
}

// ∫_{s0}^∞ (1+s²)^{-γ} ds for γ > 1/2, s0 ≥ 0.
double power_tail_unit(double gamma, double s0) {
  const double B = std::max(s0, 10.0);
  double head = 0.0;
  if (B > s0) {
    head = quad::integrate([gamma](double s) { return std::pow(1.0 + s * s, -gamma); }, s0, B,
                           kQuadRelTol);
  }
  // (1+s²)^{-γ} = Σ_k C(-γ,k) s^{-2γ-2k}, integrated termwise on [B, ∞).
  const double inv_b2 = 1.0 / (B * B);
  double coef = 1.0;
  double pw = std::pow(B, 1.0 - 2.0 * gamma);
  double tail = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double term = coef * pw / (2.0 * gamma + 2.0 * k - 1.0);
    tail += term;
    if (std::abs(term) <= 1e-18 * std::abs(tail)) break;
    coef *= (-gamma - k) / (k + 1.0);
    pw *= inv_b2;
  }
  return head + tail;
}

// ∫ φ(2x) dx over [a, b] for a piecewise-linear table in the variable s = 2x.
double tabulated_segment(const Tabulated& t, double a, double b) {
  const double s0 = 2.0 * a;
  const double s1 = 2.0 * b;
  double total = 0.0;
  const std::size_t m = t.r.size();
  auto piece = [&](double lo, double hi) {
    if (hi <= lo) return;
    total += 0.5 * (hi - lo) * (tabulated_eval(t, lo) + tabulated_eval(t, hi));
  };
  double cursor = s0;
  for (std::size_t k = 1; k < m && cursor < s1; ++k) {
    if (t.r[k] <= cursor) continue;
    const double hi = std::min(t.r[k], s1);
    piece(cursor, hi);
    cursor = hi;
  }
  if (cursor < s1) total += (s1 - cursor) * t.phi.back();
  return 0.5 * total;
}

}  // namespace

Kernel Kernel::power_law(double K, double gamma) {
  require_finite_positive(K, "power_law K");
  if (!(std::isfinite(gamma) && gamma >= 0.0))
    throw DomainError("power_law gamma must be finite and nonnegative");
  return Kernel(PowerLaw{K, gamma});
}

Kernel Kernel::exponential(double K, double lambda) {
  require_finite_positive(K, "exponential K");
  require_finite_positive(lambda, "exponential lambda");
  return Kernel(Exponential{K, lambda});
}

Kernel Kernel::tabulated(std::vector<double> r, std::vector<double> phi) {
  if (r.empty() || r.size() != phi.size())
    throw DomainError("tabulated kernel needs matching, nonempty r and phi arrays");
  if (r.front() != 0.0) throw DomainError("tabulated kernel must start at r = 0");
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (!std::isfinite(r[k]) || !std::isfinite(phi[k]))
      throw DomainError("tabulated kernel samples must be finite");
    if (!(phi[k] > 0.0)) throw DomainError("tabulated kernel values must be positive");
    if (k > 0 && !(r[k] > r[k - 1]))
      throw DomainError("tabulated kernel nodes must be strictly increasing");
    if (k > 0 && phi[k] > phi[k - 1])
      throw DomainError("tabulated kernel values must be nonincreasing");
  }
  return Kernel(Tabulated{std::move(r), std::move(phi)});
}

double tabulated_eval(const Tabulated& t, double r) {
  if (r >= t.r.back()) return t.phi.back();
  auto it = std::upper_bound(t.r.begin(), t.r.end(), r);
  const std::size_t k = static_cast<std::size_t>(it - t.r.begin());
  const double r0 = t.r[k - 1], r1 = t.r[k];
  const double s = (r - r0) / (r1 - r0);
  return t.phi[k - 1] + s * (t.phi[k] - t.phi[k - 1]);
}

double Kernel::operator()(double r) const {
  if (!(r >= 0.0)) {
    std::ostringstream os;
    os << "kernel evaluated at negative or NaN distance " << r;
    throw DomainError(os.str());
  }
  return visit([r](const auto& f) -> double {
    using T = std::decay_t<decltype(f)>;
    if constexpr (std::is_same_v<T, PowerLaw>) {
      if (f.gamma == 1.0) return f.K / (1.0 + r * r);
      return f.K * std::pow(1.0 + r * r, -f.gamma);
    } else if constexpr (std::is_same_v<T, Exponential>) {
      return f.K * std::exp(-f.lambda * r);
    } else {
      return tabulated_eval(f, r);
    }
  });
}

std::string Kernel::name() const {
  return visit([](const auto& f) -> std::string {
    using T = std::decay_t<decltype(f)>;
    if constexpr (std::is_same_v<T, PowerLaw>) return "power_law";
    else if constexpr (std::is_same_v<T, Exponential>) return "exponential";
    else return "tabulated";
  });
}

TailIntegral tail_integral(const Kernel& k, double a) {
  if (!(a >= 0.0)) throw DomainError("tail_integral lower limit must be nonnegative");
  if (std::isinf(a)) return {0.0, false};
  return k.visit([a](const auto& f) -> TailIntegral {
    using T = std::decay_t<decltype(f)>;
    if constexpr (std::is_same_v<T, PowerLaw>) {
      if (f.gamma <= 0.5) return {kInf, true};
      if (f.gamma == 1.0) return {0.5 * f.K * (0.5 * std::numbers::pi - std::atan(2.0 * a)), false};
      return {0.5 * f.K * power_tail_unit(f.gamma, 2.0 * a), false};
    } else if constexpr (std::is_same_v<T, Exponential>) {
      return {f.K / (2.0 * f.lambda) * std::exp(-2.0 * f.lambda * a), false};
    } else {
      return {kInf, true};
    }
  });
}

double segment_integral(const Kernel& k, double a, double b) {
  if (!(a >= 0.0) || !(b >= a) || !std::isfinite(b))
    throw DomainError("segment_integral needs 0 <= a <= b < inf");
  if (a == b) return 0.0;
  return k.visit([a, b, &k](const auto& f) -> double {
    using T = std::decay_t<decltype(f)>;
    if constexpr (std::is_same_v<T, PowerLaw>) {
      if (f.gamma == 0.0) return f.K * (b - a);
      if (f.gamma == 1.0) return 0.5 * f.K * (std::atan(2.0 * b) - std::atan(2.0 * a));
      if (f.gamma == 0.5) return 0.5 * f.K * (std::asinh(2.0 * b) - std::asinh(2.0 * a));
      return quad::integrate([&k](double x) { return k(2.0 * x); }, a, b, kQuadRelTol);
    } else if constexpr (std::is_same_v<T, Exponential>) {
      return f.K / (2.0 * f.lambda) *
             (std::exp(-2.0 * f.lambda * a) - std::exp(-2.0 * f.lambda * b));
    } else {
      return tabulated_segment(f, a, b);
    }
  });
}

InwardRadii inward_radii(const Kernel& k, double X, double a, double W, double vbar) {
  if (!(X >= 0.0)) throw DomainError("inward_radii: X must be nonnegative");
  if (!(W >= 0.0)) throw DomainError("inward_radii: W must be nonnegative");
  const double slack = 1e-12 * std::max(1.0, std::abs(a) + W);
  if (!(vbar >= a - slack && vbar <= a + W + slack)) {
    std::ostringstream os;
    os << "inward_radii: barycenter " << vbar << " outside support slab [" << a << ", " << a + W
       << "]";
    throw DomainError(os.str());
  }
  const double vb = std::clamp(vbar, a, a + W);
  const double p0 = k(0.0);
  const double ratio = p0 / (p0 + k(2.0 * X));
  return {ratio * (W + a - vb), ratio * (vb - a)};
}

}  // namespace flock
