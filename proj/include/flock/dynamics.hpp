#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "flock/control.hpp"
#include "flock/ensemble.hpp"
#include "flock/field.hpp"
#include "flock/kernel.hpp"

namespace flock {

struct Derivative {
  std::vector<double> dx;  // = v
  std::vector<double> dv;  // = ξ + χ_ω u
};

/// Right-hand side of the characteristics at the state of e, with an optional frozen piece.
Derivative step_rhs(const Kernel& k, const Ensemble& e, const ControlPiece* piece, double t = 0.0,
                    FieldBackend backend = FieldBackend::Rows);

struct IntegratorOptions {
  double dt_max = 0.01;
  double t_start = 0.0;
  std::size_t sample_stride = 1;  // record every k-th step; 0 records piece boundaries only
  bool keep_snapshots = false;
  FieldBackend backend = FieldBackend::Rows;
};

struct Audit {
  double mass_in_omega = 0.0;
  double omega_volume = 0.0;
  double u_sup = 0.0;
  double control_drive = 0.0;  // Σ_{i∈ω} w_i u_i on the controlled axis
};

struct Sample {
  double t;
  std::vector<AxisExtent> box;  // original coordinates
  FlockingMetrics metrics;
  Audit audit;
  long piece_index;  // −1 when no control is active
};

struct Trajectory {
  std::vector<Sample> samples;
  std::vector<Ensemble> snapshots;  // parallel to samples when requested
  Ensemble final_state;
  Audit worst;                       // maxima over every integration state
  std::vector<double> v_min_seen;    // per axis, original coordinates
  std::vector<double> v_max_seen;
  std::vector<double> W_max_seen;    // per axis, sup over states of the velocity extent
  std::size_t rk_steps = 0;
};

/// Fixed-step RK4 from opts.t_start over `horizon` (negative runs backward; only
/// without control). Every piece boundary is hit exactly; the last step of each
/// interval is shortened.
Trajectory integrate(const Kernel& k, const Ensemble& e0, const ControlPlan& plan, double horizon,
                     const IntegratorOptions& opts = {});

/// Same as integrate, with an absolute end time.
Trajectory integrate_until(const Kernel& k, const Ensemble& e0, const ControlPlan& plan,
                           double t_end, const IntegratorOptions& opts = {});

/// Least-squares slope of −log V(t) over samples with t ≥ t_from.
/// Returns 0 when V is below 1e−14 at t_from. Throws DomainError with fewer than 3
/// usable samples.
double decay_rate_estimate(const Trajectory& traj, double t_from);

/// Constraint audit of the state e at time t under piece (zeros without a piece).
Audit audit_state(const Ensemble& e, const ControlPiece* piece, double t);

}  // namespace flock
