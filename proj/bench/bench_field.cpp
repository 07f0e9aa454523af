// Interaction field throughput: OpenMP rows vs the serial symmetric pair loop.
#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "flock/ensemble.hpp"
#include "flock/field.hpp"
#include "flock/kernel.hpp"

namespace {

double seconds_per_eval(const flock::Kernel& k, const flock::Ensemble& e, flock::FieldBackend b,
                        std::vector<double>& out) {
  const std::size_t n = e.size(), d = e.dim();
  int reps = 0;
  const auto t0 = std::chrono::steady_clock::now();
  double el = 0.0;
  do {
    flock::interaction_field(k, d, n, e.x().data(), e.v().data(), e.w().data(), out.data(), b);
    ++reps;
    el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  } while (el < 0.3);
  return el / reps;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t dim = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 2;
  const auto k = flock::Kernel::power_law(1.0, 1.0);
  std::printf("threads %d, dim %zu\n", omp_get_max_threads(), dim);
  std::printf("%8s %14s %14s %10s %12s\n", "N", "rows [s]", "pairs [s]", "speedup", "max |diff|");
  for (std::size_t n : {250, 500, 1000, 2000, 4000}) {
    const std::vector<double> lo(dim, 0.0), hi(dim, 1.0);
    const auto e = flock::sample::uniform_box(dim, n, lo, hi, lo, hi, 11);
    std::vector<double> a(n * dim), b(n * dim);
    const double tr = seconds_per_eval(k, e, flock::FieldBackend::Rows, a);
    const double tp = seconds_per_eval(k, e, flock::FieldBackend::SerialPairs, b);
    double diff = 0.0;
    for (std::size_t q = 0; q < a.size(); ++q) diff = std::max(diff, std::abs(a[q] - b[q]));
    std::printf("%8zu %14.6e %14.6e %10.2f %12.3e\n", n, tr, tp, tp / tr, diff);
  }
}
