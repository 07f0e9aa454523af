#pragma once

#include <cstddef>
#include <optional>

#include "flock/kernel.hpp"
#include "flock/strategy.hpp"

namespace flock {

/// Parameters of the slice step for a 1D ensemble (any frame; normalization is internal).
StepParams step_params_1d(const Kernel& k, const Ensemble& e, double c);

/// Slice-step parameters acting on axis j of a d-dimensional ensemble. The kernel ratio
/// uses the box-diagonal ‖(Y_l + W_l)_l‖ as spatial diameter.
StepParams multi_d_params(const Kernel& k, const Ensemble& e, std::size_t axis, double c);

/// Control piece for slice i (1-based) of a step starting at t_step.
ControlPiece build_control_piece(const StepParams& p, std::size_t slice, double t_step,
                                 std::size_t step_index, double dt);

/// One step of n slice pieces over [t_step, t_step + T⁰]. Throws AlreadyFlocked when the
/// controlled velocity extent is zero.
StepOutcome fundamental_step(const Kernel& k, const Ensemble& e, std::size_t axis, double c,
                             double t_step, std::size_t step_index,
                             const StrategyOptions& opts = {});

/// ½ ∫_{2(Y⁰ + n(W⁰)²)}^∞ φ(2x)dx with n = ⌈2/c⌉.
double eta_mass_1d(const Kernel& k, double Y0, double W0, double c);

/// (1/(2√d)) ∫_{W̃}^∞ φ(2x)dx with W̃ = ‖(Y_j⁰ + W_j⁰ W_*)_j‖, W_* = n Σ W_j⁰.
double eta_mass_multi_d(const Kernel& k, const SupportBox& box, double c);

/// Repeats the step until W ≤ η (η from eta_mass_1d when absent).
StrategyResult complete_strategy_1d(const Kernel& k, const Ensemble& e0, double c,
                                    std::optional<double> eta = std::nullopt,
                                    const StrategyOptions& opts = {});

/// Axis-by-axis strategy with η from eta_mass_multi_d (or the override).
StrategyResult complete_strategy_multi_d(const Kernel& k, const Ensemble& e0, double c,
                                         std::optional<double> eta = std::nullopt,
                                         const StrategyOptions& opts = {});

/// ⌈2/c⌉.
std::size_t slice_count(double c);

}  // namespace flock
