#pragma once

#include <cstddef>
#include <vector>

#include "flock/ensemble.hpp"
#include "flock/kernel.hpp"

namespace flock {

/// ξ[μ](x, v) = Σ_j w_j φ(‖x − y_j‖)(v_j − v) for the empirical measure of e.
std::vector<double> xi_eval(const Kernel& k, const Ensemble& e, const std::vector<double>& x,
                            const std::vector<double>& v);

enum class FieldBackend {
  Rows,         // one independent row per particle, OpenMP over rows
  SerialPairs,  // each pair once, antisymmetric scatter; single thread
};

/// out[i*d + k] = ξ_k at particle i for the state (x, v, w) of n particles.
void interaction_field(const Kernel& k, std::size_t d, std::size_t n, const double* x,
                       const double* v, const double* w, double* out,
                       FieldBackend backend = FieldBackend::Rows);

}  // namespace flock
