#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "flock/ensemble.hpp"

namespace flock {

/// Closed box [x_lo, x_hi] × [v_lo, v_hi] on one axis pair (x_axis, v_axis);
/// other coordinates are unconstrained.
struct AxisBox {
  std::size_t axis;
  double x_lo, x_hi, v_lo, v_hi;
  bool contains(double x, double v) const {
    return x >= x_lo && x <= x_hi && v >= v_lo && v <= v_hi;
  }
  double area() const { return (x_hi - x_lo) * (v_hi - v_lo); }
};

/// Mass-constrained slice control on axis `axis`, in normalized coordinates.
/// ω = [x_left − 2ε, x_right + 2ε] × two velocity bands around v̄⁰ at distance α⁰..α⁰+4β⁰,
/// u = −ψ·sign(v − v̄⁰).
struct SliceForce {
  std::size_t axis;
  double vbar0, alpha0, beta0, eps0;
  double x_left, x_right;

  double psi(double x, double v) const;
  double value(double x, double v) const;
  std::vector<AxisBox> region() const;
  /// sup |∂ψ/∂v| of the construction.
  double dv_lipschitz() const { return 1.0 / beta0; }
};

/// Volume-constrained upper-band control (axis 0), u = ψ(x)ζ(v).
struct BandForce {
  double Y0, W0, eps0;

  double psi_x(double x) const;
  double zeta(double v) const;
  double value(double x, double v) const { return psi_x(x) * zeta(v); }
  std::vector<AxisBox> region() const;
};

using ForceField = std::variant<SliceForce, BandForce>;

/// One time interval of a plan, with its force frozen in time.
struct ControlPiece {
  double t_start, t_end;
  Frame frame;  // force and region live in this moving frame
  ForceField force;
  std::size_t step_index = 0;
  std::size_t slice_index = 0;
  double dt = 0.0;  // integration step for this piece; 0 means the caller's dt_max

  std::size_t axis() const;
  std::vector<AxisBox> region() const;
  /// Area of ω in its (x_axis, v_axis) plane.
  double volume() const;
  /// χ_ω at time t for a particle state in original coordinates (rows of length d).
  bool in_region(double t, const double* x, const double* v) const;
  /// Control component on axis() at time t, original coordinates.
  double force_at(double t, const double* x, const double* v) const;
};

/// Contiguous pieces; the control is zero outside [first.t_start, last.t_end).
class ControlPlan {
 public:
  void append(ControlPiece p);
  void append(const ControlPlan& other);
  const std::vector<ControlPiece>& pieces() const noexcept { return pieces_; }
  bool empty() const noexcept { return pieces_.empty(); }
  double t_begin() const;
  double t_end() const;
  double total_time() const;
  /// Index of the piece with t_start ≤ t < t_end, or −1.
  long locate(double t) const;

 private:
  std::vector<ControlPiece> pieces_;
};

}  // namespace flock
