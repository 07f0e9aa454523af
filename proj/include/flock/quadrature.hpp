#pragma once

#include <array>
#include <cmath>
#include <utility>

namespace flock::quad {

namespace detail {

// Kronrod 15-point nodes/weights with the embedded 7-point Gauss weights.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
std::pair<double, double> gk15(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double s = f(c - dx) + f(c + dx);
    kronrod += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  return {kronrod * h, std::abs((kronrod - gauss) * h)};
}

template <class F>
double adapt(F& f, double a, double b, double whole, double err, double tol, int depth) {
  if (err <= tol || depth <= 0 || b - a <= 4.0 * std::abs(a) * 2.3e-16) return whole;
  const double m = 0.5 * (a + b);
  auto [left, el] = gk15(f, a, m);
  auto [right, er] = gk15(f, m, b);
  return adapt(f, a, m, left, el, 0.5 * tol, depth - 1) +
         adapt(f, m, b, right, er, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (7/15) integral of f over [a, b].
/// Stops when the Kronrod/Gauss disagreement is below rel_tol·|I| + abs_tol.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-12, double abs_tol = 1e-300) {
  if (a == b) return 0.0;
  if (b < a) return -integrate(f, b, a, rel_tol, abs_tol);
  auto [whole, err] = detail::gk15(f, a, b);
  const double tol = std::max(rel_tol * std::abs(whole), abs_tol);
  return detail::adapt(f, a, b, whole, err, tol, 50);
}

}  // namespace flock::quad
