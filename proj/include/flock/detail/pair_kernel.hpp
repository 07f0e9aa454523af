#pragma once

// Kernel functors taking the squared distance, specialized so the family switch
// happens once per field evaluation instead of once per pair.

#include <cmath>
#include <cstddef>
#include <type_traits>

#include "flock/kernel.hpp"

namespace flock::detail {

struct InvQuad {
  double K;
  double operator()(double r2) const { return K / (1.0 + r2); }
};

struct PowGeneral {
  double K, gamma;
  double operator()(double r2) const { return K * std::pow(1.0 + r2, -gamma); }
};

struct ExpDecay {
  double K, lambda;
  double operator()(double r2) const { return K * std::exp(-lambda * std::sqrt(r2)); }
};

struct Table {
  const Tabulated* t;
  double operator()(double r2) const { return tabulated_eval(*t, std::sqrt(r2)); }
};

template <class F>
decltype(auto) with_pair_kernel(const Kernel& k, F&& f) {
  return k.visit([&f](const auto& fam) -> decltype(auto) {
    using T = std::decay_t<decltype(fam)>;
    if constexpr (std::is_same_v<T, PowerLaw>) {
      if (fam.gamma == 1.0) return f(InvQuad{fam.K});
      return f(PowGeneral{fam.K, fam.gamma});
    } else if constexpr (std::is_same_v<T, Exponential>) {
      return f(ExpDecay{fam.K, fam.lambda});
    } else {
      return f(Table{&fam});
    }
  });
}

/// ξ at (xi, vi): out[k] = Σ_j w_j φ(|x_j − xi|)(v_j,k − vi_k), summed in index order.
/// D > 0 fixes the dimension at compile time; D == 0 reads it from d.
template <int D, class Phi>
inline void xi_row(const Phi& phi, std::size_t d, std::size_t n, const double* x, const double* v,
                   const double* w, const double* xi, const double* vi, double* out) {
  const std::size_t dim = D > 0 ? static_cast<std::size_t>(D) : d;
  if constexpr (D == 1) {
    double acc = 0.0;
    const double x0 = xi[0], v0 = vi[0];
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = x[j] - x0;
      const double f = w[j] * phi(dx * dx);
      acc += f * (v[j] - v0);
    }
    out[0] = acc;
  } else if constexpr (D == 2) {
    double a0 = 0.0, a1 = 0.0;
    const double x0 = xi[0], x1 = xi[1], v0 = vi[0], v1 = vi[1];
    for (std::size_t j = 0; j < n; ++j) {
      const double dx0 = x[2 * j] - x0;
      const double dx1 = x[2 * j + 1] - x1;
      const double f = w[j] * phi(dx0 * dx0 + dx1 * dx1);
      a0 += f * (v[2 * j] - v0);
      a1 += f * (v[2 * j + 1] - v1);
    }
    out[0] = a0;
    out[1] = a1;
  } else {
    for (std::size_t k = 0; k < dim; ++k) out[k] = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double r2 = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double dx = x[j * dim + k] - xi[k];
        r2 += dx * dx;
      }
      const double f = w[j] * phi(r2);
      for (std::size_t k = 0; k < dim; ++k) out[k] += f * (v[j * dim + k] - vi[k]);
    }
  }
}

template <class F>
decltype(auto) with_dim(std::size_t d, F&& f) {
  if (d == 1) return f(std::integral_constant<int, 1>{});
  if (d == 2) return f(std::integral_constant<int, 2>{});
  return f(std::integral_constant<int, 0>{});
}

}  // namespace flock::detail
