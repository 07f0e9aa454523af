#pragma once

#include <optional>

#include "flock/kernel.hpp"
#include "flock/strategy.hpp"

namespace flock {

/// Parameters of the volume-constrained step for a 1D ensemble (normalization internal).
SpaceStepParams space_step_params(const Kernel& k, const Ensemble& e, double c);

/// u⁰(x, v) = ψ(x)ζ(v) in the step's normalized frame.
double space_force(const SpaceStepParams& p, double x, double v);

/// One band piece over [t_step, t_step + ε⁰].
StepOutcome fundamental_step_space(const Kernel& k, const Ensemble& e, double c, double t_step,
                                   std::size_t step_index, const StrategyOptions& opts = {});

/// ½ ∫_{2(Y⁰ + (W⁰)²)}^∞ φ(2x)dx.
double eta_space(const Kernel& k, double Y0, double W0);

/// Repeats the volume step until W ≤ η.
StrategyResult complete_strategy_space(const Kernel& k, const Ensemble& e0, double c,
                                       std::optional<double> eta = std::nullopt,
                                       const StrategyOptions& opts = {});

}  // namespace flock
