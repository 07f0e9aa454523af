#include "flock/field.hpp"

#include "flock/detail/pair_kernel.hpp"
#include "flock/error.hpp"

namespace flock {

namespace {

template <int D, class Phi>
void field_rows(const Phi& phi, std::size_t d, std::size_t n, const double* x, const double* v,
                const double* w, double* out) {
  const auto rows = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < rows; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    detail::xi_row<D>(phi, d, n, x, v, w, x + ii * d, v + ii * d, out + ii * d);
  }
}

template <class Phi>
void field_pairs(const Phi& phi, std::size_t d, std::size_t n, const double* x, const double* v,
                 const double* w, double* out) {
  for (std::size_t q = 0; q < n * d; ++q) out[q] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double r2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double dx = x[j * d + k] - x[i * d + k];
        r2 += dx * dx;
      }
      const double f = phi(r2);
      for (std::size_t k = 0; k < d; ++k) {
        const double g = f * (v[j * d + k] - v[i * d + k]);
        out[i * d + k] += w[j] * g;
        out[j * d + k] -= w[i] * g;
      }
    }
  }
}

}  // namespace

std::vector<double> xi_eval(const Kernel& k, const Ensemble& e, const std::vector<double>& x,
                            const std::vector<double>& v) {
  const std::size_t d = e.dim();
  if (x.size() != d || v.size() != d) throw DomainError("xi_eval: query dimension mismatch");
  std::vector<double> out(d, 0.0);
  detail::with_pair_kernel(k, [&](const auto& phi) {
    detail::with_dim(d, [&](auto D) {
      detail::xi_row<decltype(D)::value>(phi, d, e.size(), e.x().data(), e.v().data(),
                                         e.w().data(), x.data(), v.data(), out.data());
    });
  });
  return out;
}

void interaction_field(const Kernel& k, std::size_t d, std::size_t n, const double* x,
                       const double* v, const double* w, double* out, FieldBackend backend) {
  if (n == 0) throw DomainError("interaction_field: empty ensemble");
  detail::with_pair_kernel(k, [&](const auto& phi) {
    if (backend == FieldBackend::SerialPairs) {
      field_pairs(phi, d, n, x, v, w, out);
      return;
    }
    detail::with_dim(d, [&](auto D) { field_rows<decltype(D)::value>(phi, d, n, x, v, w, out); });
  });
}

}  // namespace flock
