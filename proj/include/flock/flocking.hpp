#pragma once

#include <optional>

#include "flock/ensemble.hpp"
#include "flock/kernel.hpp"

namespace flock {

struct FlockingVerdict {
  bool in_region;
  double threshold;  // +inf for kernels with a divergent tail
  double margin;     // threshold minus the tested quantity
  std::optional<double> X_M;
};

/// V⁰ < ∫_{X⁰}^∞ φ(2x)dx with radii about the barycenters; X_M bounds the future
/// spatial radius when the test passes.
FlockingVerdict theorem3_test(const Kernel& k, const Ensemble& e);

/// Same test from given radii (X⁰, V⁰).
FlockingVerdict theorem3_test(const Kernel& k, double X0, double V0);

/// 2Ṽ ≤ ∫_{2X̃}^∞ φ(2x)dx for covering balls of radii X̃, Ṽ.
FlockingVerdict corollary2_test(const Kernel& k, double X_tilde, double V_tilde);

/// Box test with X̃, Ṽ the half diagonals of the support box, which cover it
/// from the box centers.
FlockingVerdict corollary2_test(const Kernel& k, const Ensemble& e);

/// The verdict's inequality with the threshold scaled by `safety` (at most 1).
bool passes_with_safety(const FlockingVerdict& v, double safety);

/// Λ < ∫_Γ^∞ φ(x)dx with Γ, Λ the weighted second moments about the barycenters.
FlockingVerdict finite_dim_test(const Kernel& k, const Ensemble& e);

/// Smallest X_M ≥ X⁰ with ∫_{X⁰}^{X_M} φ(2x)dx = V⁰, by bisection to 1e−10.
double solve_X_M(const Kernel& k, double X0, double V0);

}  // namespace flock
