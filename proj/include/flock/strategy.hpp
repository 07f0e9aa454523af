#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "flock/control.hpp"
#include "flock/dynamics.hpp"
#include "flock/ensemble.hpp"
#include "flock/flocking.hpp"

namespace flock {

/// Parameters of one mass-constrained step on axis `axis`, in the step's normalized frame.
struct StepParams {
  std::size_t axis = 0;
  double c = 0.0;
  Frame frame;
  double Y0 = 0.0, W0 = 0.0;  // controlled-axis extents
  double vbar0 = 0.0;
  double diameter = 0.0;      // argument of φ in the kernel ratio
  double alpha_plus = 0.0, alpha_minus = 0.0, beta_plus = 0.0, beta_minus = 0.0;
  double alpha0 = 0.0, beta0 = 0.0;
  std::size_t n = 0;
  double target_mass = 0.0;
  std::vector<double> cuts;
  std::vector<double> slice_mass;
  bool heavy_atom = false;
  double eps0 = 0.0, eps_floor = 0.0;
  bool eps_floored = false;
  double T0 = 0.0;
  double div_bound = 0.0;  // 1/β⁰ + 1
};

/// Parameters of one volume-constrained step (axis 0), normalized frame.
struct SpaceStepParams {
  double c = 0.0;
  Frame frame;
  double Y0 = 0.0, W0 = 0.0, vbar0 = 0.0;
  double alpha0 = 0.0, beta0 = 0.0;
  double eps_stated = 0.0;  // value of the closed-form definition before any shrink
  double eps0 = 0.0;
  bool shrunk = false;
  double T0 = 0.0;
  double area = 0.0;  // |ω⁰| = 4ε⁰(Y⁰ + ε⁰W⁰ + 2ε⁰)
  AxisBox omega{0, 0, 0, 0, 0};
};

struct StepRecord {
  std::size_t index = 0;
  double t_start = 0.0, t_end = 0.0;
  std::variant<StepParams, SpaceStepParams> params;
  std::vector<double> W_before, W_after, Y_before, Y_after;
  double max_mass_in_omega = 0.0;
  double max_omega_volume = 0.0;
  double max_u = 0.0;
  double max_vbar_drift = 0.0;          // sup over samples of |v̄_j(t) − v̄_j⁰|
  double v_lo_seen = 0.0, v_hi_seen = 0.0;  // controlled axis, normalized frame
  double required_decrease = 0.0;       // T⁰/n or ε⁰
  bool contraction_ok = true;
  bool constraint_ok = true;
  bool drift_ok = true;
  bool box_ok = true;
  bool spatial_ok = true;
};

struct StrategyOptions {
  double dt_max = 0.01;
  std::size_t max_steps = 100000;
  std::size_t steps_per_step = 20;  // RK4 steps per fundamental step, at least
  std::size_t sample_stride = 0;    // 0: record piece boundaries only
  bool strict = true;               // throw on any failed per-step audit
  bool keep_snapshots = false;
  FieldBackend backend = FieldBackend::Rows;
};

struct StrategySummary {
  std::string mode;
  std::size_t steps = 0;
  double total_time = 0.0;
  double eta = 0.0;
  std::optional<double> eta_alt;   // the other bound's η where two apply
  double time_bound = 0.0;
  std::vector<double> Y_bound;     // per axis
  std::vector<AxisExtent> initial_box, terminal_box;
  double worst_mass_in_omega = 0.0;
  double worst_omega_volume = 0.0;
  double worst_u = 0.0;
  double max_weight = 0.0;
  bool contraction_ok = true, constraint_ok = true, drift_ok = true, box_ok = true;
  bool time_ok = true, Y_ok = true, phase_order_ok = true;
  std::vector<double> phase_max_prev_W;  // per phase, sup of W_l (l < j) during phase j
  FlockingVerdict terminal{false, 0.0, 0.0, std::nullopt};
  std::optional<FlockingVerdict> terminal_surrogate;
};

struct StrategyResult {
  ControlPlan plan;
  Trajectory trajectory;
  std::vector<StepRecord> records;
  StrategySummary summary;
};

/// Nontermination or a failed audit; carries the history up to the failure.
class StrategyError : public std::runtime_error {
 public:
  StrategyError(const std::string& what, std::vector<StepRecord> records, ControlPlan plan)
      : std::runtime_error(what), records_(std::move(records)), plan_(std::move(plan)) {}
  const std::vector<StepRecord>& records() const noexcept { return records_; }
  const ControlPlan& plan() const noexcept { return plan_; }

 private:
  std::vector<StepRecord> records_;
  ControlPlan plan_;
};

/// Result of a single fundamental step.
struct StepOutcome {
  Ensemble after;
  StepRecord record;
  ControlPlan fragment;
  Trajectory trajectory;
};

namespace detail {

/// Appends a step trajectory to a running one, dropping the duplicated first sample.
/// Concatenates part onto acc. Piece indices in part are shifted by piece_offset; at the
/// junction the earlier sample wins unless it has no active piece.
void append_trajectory(std::optional<Trajectory>& acc, Trajectory&& part, long piece_offset = 0);

/// Trajectory with only an initial sample.
Trajectory trivial_trajectory(const Ensemble& e, double t);

/// Per-step RK4 step size: min(dt_max, T⁰ / steps_per_step).
double step_dt(double T0, const StrategyOptions& opts);

std::vector<double> extents_Y(const SupportBox& b);
std::vector<double> extents_W(const SupportBox& b);

}  // namespace detail

}  // namespace flock
