#include "flock/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "flock/error.hpp"

namespace flock {

namespace {

double neumaier_sum(const std::vector<double>& a) {
  double s = 0.0, comp = 0.0;
  for (double x : a) {
    const double t = s + x;
    if (std::abs(s) >= std::abs(x))
      comp += (s - t) + x;
    else
      comp += (x - t) + s;
    s = t;
  }
  return s + comp;
}

void check_box_args(std::size_t dim, const std::vector<double>& x_lo,
                    const std::vector<double>& x_hi, const std::vector<double>& v_lo,
                    const std::vector<double>& v_hi) {
  if (dim == 0) throw DomainError("dimension must be at least 1");
  if (x_lo.size() != dim || x_hi.size() != dim || v_lo.size() != dim || v_hi.size() != dim)
    throw DomainError("sampler box bounds must have one entry per axis");
  for (std::size_t k = 0; k < dim; ++k)
    if (!(x_lo[k] <= x_hi[k]) || !(v_lo[k] <= v_hi[k]))
      throw DomainError("sampler box bounds must satisfy lo <= hi");
}

}  // namespace

Ensemble::Ensemble(std::size_t dim, std::vector<double> x, std::vector<double> v,
                   std::vector<double> w)
    : dim_(dim), x_(std::move(x)), v_(std::move(v)), w_(std::move(w)) {
  if (dim_ == 0) throw DomainError("ensemble dimension must be at least 1");
  if (w_.empty()) throw DomainError("ensemble must be nonempty");
  if (x_.size() != w_.size() * dim_ || v_.size() != w_.size() * dim_)
    throw DomainError("ensemble position/velocity arrays must have N*d entries");
  for (double wi : w_)
    if (!(wi > 0.0) || !std::isfinite(wi)) throw DomainError("ensemble weights must be positive");
  for (std::size_t i = 0; i < x_.size(); ++i)
    if (!std::isfinite(x_[i]) || !std::isfinite(v_[i]))
      throw DomainError("ensemble state must be finite");
  const double total = neumaier_sum(w_);
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "ensemble weights must sum to 1 (got " << total << ")";
    throw DomainError(os.str());
  }
  max_w_ = *std::max_element(w_.begin(), w_.end());
}

Ensemble Ensemble::uniform_weights(std::size_t dim, std::vector<double> x, std::vector<double> v) {
  if (dim == 0) throw DomainError("ensemble dimension must be at least 1");
  const std::size_t n = x.size() / dim;
  if (n == 0) throw DomainError("ensemble must be nonempty");
  return Ensemble(dim, std::move(x), std::move(v),
                  std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Ensemble Ensemble::with_state(std::vector<double> x, std::vector<double> v) const {
  if (x.size() != x_.size() || v.size() != v_.size())
    throw DomainError("with_state: state size mismatch");
  Ensemble e;
  e.dim_ = dim_;
  e.x_ = std::move(x);
  e.v_ = std::move(v);
  e.w_ = w_;
  e.max_w_ = max_w_;
  return e;
}

Barycenters barycenters(const Ensemble& e) {
  const std::size_t d = e.dim();
  Barycenters b{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double wi = e.w(i);
    for (std::size_t k = 0; k < d; ++k) {
      b.xbar[k] += wi * e.x(i, k);
      b.vbar[k] += wi * e.v(i, k);
    }
  }
  return b;
}

SupportBox support_box(const Ensemble& e) {
  const std::size_t d = e.dim();
  SupportBox box;
  box.axes.resize(d);
  for (std::size_t k = 0; k < d; ++k)
    box.axes[k] = {e.x(0, k), e.x(0, k), e.v(0, k), e.v(0, k)};
  for (std::size_t i = 1; i < e.size(); ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      auto& ax = box.axes[k];
      ax.x_lo = std::min(ax.x_lo, e.x(i, k));
      ax.x_hi = std::max(ax.x_hi, e.x(i, k));
      ax.v_lo = std::min(ax.v_lo, e.v(i, k));
      ax.v_hi = std::max(ax.v_hi, e.v(i, k));
    }
  }
  box.frame.x_offset.resize(d);
  box.frame.v_offset.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    box.frame.x_offset[k] = box.axes[k].x_lo;
    box.frame.v_offset[k] = box.axes[k].v_lo;
  }
  return box;
}

Ensemble normalize(const Ensemble& e, const Frame& frame) {
  const std::size_t d = e.dim();
  if (frame.x_offset.size() != d || frame.v_offset.size() != d)
    throw DomainError("normalize: frame dimension mismatch");
  std::vector<double> x = e.x(), v = e.v();
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      x[i * d + k] -= frame.x_offset[k];
      v[i * d + k] -= frame.v_offset[k];
    }
  }
  return e.with_state(std::move(x), std::move(v));
}

FlockingMetrics flocking_metrics(const Ensemble& e) {
  const std::size_t d = e.dim();
  auto b = barycenters(e);
  FlockingMetrics m{b.xbar, b.vbar, 0.0, 0.0, 0.0};
  double X2 = 0.0, V2 = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    double dx2 = 0.0, dv2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double dx = e.x(i, k) - b.xbar[k];
      const double dv = e.v(i, k) - b.vbar[k];
      dx2 += dx * dx;
      dv2 += dv * dv;
    }
    m.Lambda += e.w(i) * dv2;
    X2 = std::max(X2, dx2);
    V2 = std::max(V2, dv2);
  }
  m.X = std::sqrt(X2);
  m.V = std::sqrt(V2);
  return m;
}

double slice_mass(const Ensemble& e, std::size_t axis, double lo, double hi) {
  if (axis >= e.dim()) throw DomainError("slice_mass: axis out of range");
  double m = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double xi = e.x(i, axis);
    if (xi >= lo && xi <= hi) m += e.w(i);
  }
  return m;
}

QuantileCuts mass_quantile_cuts(const Ensemble& e, std::size_t axis, double target_mass,
                                std::size_t n) {
  if (axis >= e.dim()) throw DomainError("mass_quantile_cuts: axis out of range");
  if (n == 0) throw DomainError("mass_quantile_cuts: n must be positive");
  if (!(target_mass > 0.0)) throw DomainError("mass_quantile_cuts: target must be positive");
  if (target_mass > 1.0 + 1e-12)
    throw DomainError("mass_quantile_cuts: target mass exceeds total mass");
  if (static_cast<double>(n) * target_mass < 1.0 - 1e-12)
    throw DomainError("mass_quantile_cuts: n slices of the target mass cannot cover the measure");

  const std::size_t N = e.size();
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) {
    return e.x(p, axis) < e.x(q, axis);
  });

  QuantileCuts out;
  out.cuts.assign(n + 1, e.x(order.back(), axis));
  out.slice_mass.assign(n, 0.0);
  out.cuts[0] = e.x(order.front(), axis);
  out.heavy_atom = e.max_weight() > target_mass;

  std::size_t slice = 0;
  for (std::size_t p : order) {
    out.slice_mass[slice] += e.w(p);
    if (slice + 1 < n && out.slice_mass[slice] >= target_mass - 1e-12) {
      out.cuts[slice + 1] = e.x(p, axis);
      ++slice;
    }
  }
  return out;
}

double wasserstein1_1d(const Ensemble& a, const Ensemble& b, Coordinate c) {
  if (c.axis >= a.dim() || c.axis >= b.dim() || a.dim() != b.dim())
    throw DomainError("wasserstein1_1d: dimension mismatch");
  auto coord = [&](const Ensemble& e, std::size_t i) {
    return c.kind == Coordinate::Position ? e.x(i, c.axis) : e.v(i, c.axis);
  };
  // Signed atoms: +w for a, −w for b; W1 = ∫ |F_a − F_b|.
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(a.size() + b.size());
  for (std::size_t i = 0; i < a.size(); ++i) atoms.emplace_back(coord(a, i), a.w(i));
  for (std::size_t i = 0; i < b.size(); ++i) atoms.emplace_back(coord(b, i), -b.w(i));
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const auto& p, const auto& q) { return p.first < q.first; });
  double cdf = 0.0, total = 0.0;
  for (std::size_t k = 0; k + 1 < atoms.size(); ++k) {
    cdf += atoms[k].second;
    total += std::abs(cdf) * (atoms[k + 1].first - atoms[k].first);
  }
  return total;
}

namespace sample {

Ensemble uniform_box(std::size_t dim, std::size_t n, const std::vector<double>& x_lo,
                     const std::vector<double>& x_hi, const std::vector<double>& v_lo,
                     const std::vector<double>& v_hi, std::uint64_t seed) {
  check_box_args(dim, x_lo, x_hi, v_lo, v_hi);
  if (n == 0) throw DomainError("particle count must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<double> x(n * dim), v(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dim; ++k) x[i * dim + k] = x_lo[k] + (x_hi[k] - x_lo[k]) * u01(rng);
    for (std::size_t k = 0; k < dim; ++k) v[i * dim + k] = v_lo[k] + (v_hi[k] - v_lo[k]) * u01(rng);
  }
  return Ensemble::uniform_weights(dim, std::move(x), std::move(v));
}

Ensemble grid(std::size_t dim, std::size_t m, const std::vector<double>& x_lo,
              const std::vector<double>& x_hi, const std::vector<double>& v_lo,
              const std::vector<double>& v_hi) {
  check_box_args(dim, x_lo, x_hi, v_lo, v_hi);
  if (m == 0) throw DomainError("grid needs at least one node per coordinate");
  const std::size_t coords = 2 * dim;
  std::size_t n = 1;
  for (std::size_t c = 0; c < coords; ++c) n *= m;
  std::vector<double> x(n * dim), v(n * dim);
  std::vector<std::size_t> idx(coords, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dim; ++k) {
      const double sx = (static_cast<double>(idx[k]) + 0.5) / static_cast<double>(m);
      const double sv = (static_cast<double>(idx[dim + k]) + 0.5) / static_cast<double>(m);
      x[i * dim + k] = x_lo[k] + (x_hi[k] - x_lo[k]) * sx;
      v[i * dim + k] = v_lo[k] + (v_hi[k] - v_lo[k]) * sv;
    }
    for (std::size_t c = 0; c < coords; ++c) {
      if (++idx[c] < m) break;
      idx[c] = 0;
    }
  }
  return Ensemble::uniform_weights(dim, std::move(x), std::move(v));
}

}  // namespace sample

}  // namespace flock
