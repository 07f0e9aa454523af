#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace flock {

/// Weighted particle cloud {(x_i, v_i, w_i)} in R^d × R^d.
/// Positions and velocities are stored row-major: x[i*d + k].
class Ensemble {
 public:
  Ensemble(std::size_t dim, std::vector<double> x, std::vector<double> v, std::vector<double> w);

  /// Equal weights 1/N.
  static Ensemble uniform_weights(std::size_t dim, std::vector<double> x, std::vector<double> v);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return w_.size(); }

  const std::vector<double>& x() const noexcept { return x_; }
  const std::vector<double>& v() const noexcept { return v_; }
  const std::vector<double>& w() const noexcept { return w_; }

  double x(std::size_t i, std::size_t k) const { return x_[i * dim_ + k]; }
  double v(std::size_t i, std::size_t k) const { return v_[i * dim_ + k]; }
  double w(std::size_t i) const { return w_[i]; }
  double max_weight() const noexcept { return max_w_; }

  /// Same weights, new state. Sizes must match.
  Ensemble with_state(std::vector<double> x, std::vector<double> v) const;

 private:
  Ensemble() = default;
  std::size_t dim_ = 0;
  std::vector<double> x_, v_, w_;
  double max_w_ = 0.0;
};

/// Galilean frame: v_norm = v − v_offset, x_norm = x − x_offset − v_offset·(t − t_ref).
struct Frame {
  std::vector<double> x_offset;
  std::vector<double> v_offset;
  double t_ref = 0.0;
  double x_at(std::size_t k, double x, double t) const {
    return x - x_offset[k] - v_offset[k] * (t - t_ref);
  }
  double v_at(std::size_t k, double v) const { return v - v_offset[k]; }
};

struct AxisExtent {
  double x_lo, x_hi;
  double v_lo, v_hi;
  double Y() const { return x_hi - x_lo; }
  double W() const { return v_hi - v_lo; }
};

/// Tightest axis-aligned box, stored in original coordinates, with the frame that
/// translates min position to 0 and min velocity to 0 on each axis.
struct SupportBox {
  std::vector<AxisExtent> axes;
  Frame frame;
  double Y(std::size_t j) const { return axes[j].Y(); }
  double W(std::size_t j) const { return axes[j].W(); }
  /// Velocity offset in the normalized frame.
  double a(std::size_t j) const { return axes[j].v_lo - frame.v_offset[j]; }
};

struct Barycenters {
  std::vector<double> xbar;
  std::vector<double> vbar;
};

struct FlockingMetrics {
  std::vector<double> xbar;
  std::vector<double> vbar;
  double Lambda;  // Σ w |v − v̄|²
  double X;       // max ‖x − x̄‖
  double V;       // max ‖v − v̄‖
};

Barycenters barycenters(const Ensemble& e);
SupportBox support_box(const Ensemble& e);
/// Translate so that the box minimum sits at the origin on every axis.
Ensemble normalize(const Ensemble& e, const Frame& frame);
FlockingMetrics flocking_metrics(const Ensemble& e);

/// Σ w_i over particles with lo ≤ x_{i,axis} ≤ hi.
double slice_mass(const Ensemble& e, std::size_t axis, double lo, double hi);

struct QuantileCuts {
  std::vector<double> cuts;         // n + 1 cut positions
  std::vector<double> slice_mass;   // mass assigned to each slice by the scan
  bool heavy_atom = false;          // some particle weighs more than the target
};

/// Cumulative-mass slicing along `axis`. Cuts start at the smallest and end at the
/// largest coordinate; interior cuts are the coordinates where the running mass of the
/// current slice first reaches target_mass. Ties are ordered by particle index.
QuantileCuts mass_quantile_cuts(const Ensemble& e, std::size_t axis, double target_mass,
                                std::size_t n);

struct Coordinate {
  enum Kind { Position, Velocity } kind;
  std::size_t axis;
};

/// Exact 1D Wasserstein-1 distance between the marginals on one coordinate.
double wasserstein1_1d(const Ensemble& a, const Ensemble& b, Coordinate c);

namespace sample {

/// N i.i.d. uniform particles in the product box, equal weights.
Ensemble uniform_box(std::size_t dim, std::size_t n, const std::vector<double>& x_lo,
                     const std::vector<double>& x_hi, const std::vector<double>& v_lo,
                     const std::vector<double>& v_hi, std::uint64_t seed);

/// Midpoint tensor grid with m nodes per coordinate: N = m^(2d), equal weights.
Ensemble grid(std::size_t dim, std::size_t m, const std::vector<double>& x_lo,
              const std::vector<double>& x_hi, const std::vector<double>& v_lo,
              const std::vector<double>& v_hi);

}  // namespace sample

}  // namespace flock
