#include "flock/control.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "flock/error.hpp"

namespace flock {

namespace {

double clamp01(double s) { return std::clamp(s, 0.0, 1.0); }

}  // namespace

double SliceForce::psi(double x, double v) const {
  const double lo = x_left - 2.0 * eps0;
  const double hi = x_right + 2.0 * eps0;
  const double sx = std::min(x - lo, hi - x) / eps0;
  const double s = std::abs(v - vbar0);
  const double sv = std::min(s - (alpha0 + beta0), (alpha0 + 4.0 * beta0) - s) / beta0;
  return clamp01(std::min(sx, sv));
}

double SliceForce::value(double x, double v) const {
  const double p = psi(x, v);
  if (p == 0.0) return 0.0;
  return v > vbar0 ? -p : p;
}

std::vector<AxisBox> SliceForce::region() const {
  const double lo = x_left - 2.0 * eps0;
  const double hi = x_right + 2.0 * eps0;
  return {
      AxisBox{axis, lo, hi, vbar0 - alpha0 - 4.0 * beta0, vbar0 - alpha0 - beta0},
      AxisBox{axis, lo, hi, vbar0 + alpha0 + beta0, vbar0 + alpha0 + 4.0 * beta0},
  };
}

double BandForce::psi_x(double x) const {
  const double top = Y0 + eps0 * W0;
  if (x < -eps0) return 0.0;
  if (x < 0.0) return (x + eps0) / eps0;
  if (x <= top) return 1.0;
  if (x < top + eps0) return (top + eps0 - x) / eps0;
  return 0.0;
}

double BandForce::zeta(double v) const {
  if (v < W0 - 2.0 * eps0) return 0.0;
  if (v < W0 - eps0) return -(v - (W0 - 2.0 * eps0)) / eps0;
  if (v < W0 + eps0) return -1.0;
  if (v < W0 + 2.0 * eps0) return -((W0 + 2.0 * eps0) - v) / eps0;
  return 0.0;
}

std::vector<AxisBox> BandForce::region() const {
  return {AxisBox{0, -eps0, Y0 + eps0 * W0 + eps0, W0 - 2.0 * eps0, W0 + 2.0 * eps0}};
}

std::size_t ControlPiece::axis() const {
  return std::visit(
      [](const auto& f) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(f)>, SliceForce>) return f.axis;
        else return 0;
      },
      force);
}

std::vector<AxisBox> ControlPiece::region() const {
  return std::visit([](const auto& f) { return f.region(); }, force);
}

double ControlPiece::volume() const {
  double a = 0.0;
  for (const auto& b : region()) a += b.area();
  return a;
}

bool ControlPiece::in_region(double t, const double* x, const double* v) const {
  const std::size_t j = axis();
  const double xn = frame.x_at(j, x[j], t);
  const double vn = frame.v_at(j, v[j]);
  for (const auto& b : region())
    if (b.contains(xn, vn)) return true;
  return false;
}

double ControlPiece::force_at(double t, const double* x, const double* v) const {
  const std::size_t j = axis();
  const double xn = frame.x_at(j, x[j], t);
  const double vn = frame.v_at(j, v[j]);
  return std::visit([xn, vn](const auto& f) { return f.value(xn, vn); }, force);
}

void ControlPlan::append(ControlPiece p) {
  if (!(p.t_end > p.t_start)) throw DomainError("control piece must have t_start < t_end");
  if (!pieces_.empty() && p.t_start != pieces_.back().t_end) {
    std::ostringstream os;
    os.precision(17);
    os << "control pieces must be contiguous: previous ends at " << pieces_.back().t_end
       << ", next starts at " << p.t_start;
    throw DomainError(os.str());
  }
  pieces_.push_back(std::move(p));
}

void ControlPlan::append(const ControlPlan& other) {
  for (const auto& p : other.pieces_) append(p);
}

double ControlPlan::t_begin() const { return pieces_.empty() ? 0.0 : pieces_.front().t_start; }
double ControlPlan::t_end() const { return pieces_.empty() ? 0.0 : pieces_.back().t_end; }

double ControlPlan::total_time() const {
  double s = 0.0;
  for (const auto& p : pieces_) s += p.t_end - p.t_start;
  return s;
}

long ControlPlan::locate(double t) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                             [](double tt, const ControlPiece& p) { return tt < p.t_start; });
  if (it == pieces_.begin()) return -1;
  --it;
  if (t < it->t_end) return static_cast<long>(it - pieces_.begin());
  return -1;
}

}  // namespace flock
