#include "flock/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "flock/error.hpp"

namespace flock {

namespace {

struct Segment {
  double a, b;
  long piece;
};

void rhs(const Kernel& k, std::size_t d, std::size_t n, double t, const double* x,
         const double* v, const double* w, const ControlPiece* piece, FieldBackend backend,
         double* dx, double* dv) {
  std::copy(v, v + n * d, dx);
  interaction_field(k, d, n, x, v, w, dv, backend);
  if (piece) {
    const std::size_t j = piece->axis();
    for (std::size_t i = 0; i < n; ++i)
      dv[i * d + j] += piece->force_at(t, x + i * d, v + i * d);
  }
}

std::vector<Segment> build_segments(const ControlPlan& plan, double t0, double t1) {
  std::vector<Segment> segs;
  if (t1 == t0) return segs;
  if (t1 < t0) {
    segs.push_back({t0, t1, -1});
    return segs;
  }
  double cursor = t0;
  const auto& pieces = plan.pieces();
  for (std::size_t p = 0; p < pieces.size() && cursor < t1; ++p) {
    const auto& pc = pieces[p];
    if (pc.t_end <= cursor) continue;
    if (pc.t_start >= t1) break;
    if (pc.t_start > cursor) {
      segs.push_back({cursor, pc.t_start, -1});
      cursor = pc.t_start;
    }
    const double e = std::min(pc.t_end, t1);
    segs.push_back({cursor, e, static_cast<long>(p)});
    cursor = e;
  }
  if (cursor < t1) segs.push_back({cursor, t1, -1});
  return segs;
}

std::vector<AxisExtent> box_of(const Ensemble& e) { return support_box(e).axes; }

bool all_finite(const std::vector<double>& a) {
  for (double q : a)
    if (!std::isfinite(q)) return false;
  return true;
}

}  // namespace

Derivative step_rhs(const Kernel& k, const Ensemble& e, const ControlPiece* piece, double t,
                    FieldBackend backend) {
  const std::size_t d = e.dim(), n = e.size();
  Derivative out{std::vector<double>(n * d), std::vector<double>(n * d)};
  rhs(k, d, n, t, e.x().data(), e.v().data(), e.w().data(), piece, backend, out.dx.data(),
      out.dv.data());
  return out;
}

Audit audit_state(const Ensemble& e, const ControlPiece* piece, double t) {
  Audit a;
  if (!piece) return a;
  const std::size_t d = e.dim(), j = piece->axis();
  const auto boxes = piece->region();
  a.omega_volume = piece->volume();
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double xn = piece->frame.x_at(j, e.x(i, j), t);
    const double vn = piece->frame.v_at(j, e.v(i, j));
    bool inside = false;
    for (const auto& b : boxes) inside = inside || b.contains(xn, vn);
    const double u = piece->force_at(t, e.x().data() + i * d, e.v().data() + i * d);
    a.u_sup = std::max(a.u_sup, std::abs(u));
    if (inside) {
      a.mass_in_omega += e.w(i);
      a.control_drive += e.w(i) * u;
    }
  }
  return a;
}

Trajectory integrate(const Kernel& k, const Ensemble& e0, const ControlPlan& plan, double horizon,
                     const IntegratorOptions& opts) {
  if (!std::isfinite(horizon)) throw DomainError("integrate: horizon must be finite");
  return integrate_until(k, e0, plan, opts.t_start + horizon, opts);
}

Trajectory integrate_until(const Kernel& k, const Ensemble& e0, const ControlPlan& plan,
                           double t_end, const IntegratorOptions& opts) {
  if (!(opts.dt_max > 0.0) || !std::isfinite(opts.dt_max))
    throw DomainError("integrate: dt_max must be positive");
  if (!std::isfinite(t_end) || !std::isfinite(opts.t_start))
    throw DomainError("integrate: start and end times must be finite");
  const double t0 = opts.t_start;
  const double t1 = t_end;
  if (t1 < t0 && !plan.empty())
    throw DomainError("integrate: backward integration is only supported without control");

  const std::size_t d = e0.dim(), n = e0.size();
  const std::size_t len = n * d;
  const double* w = e0.w().data();

  std::vector<double> x = e0.x(), v = e0.v();
  std::vector<double> k1x(len), k1v(len), k2x(len), k2v(len), k3x(len), k3v(len), k4x(len),
      k4v(len), sx(len), sv(len);

  std::vector<Sample> samples;
  std::vector<Ensemble> snaps;
  Audit worst;
  std::vector<double> vmin(d, std::numeric_limits<double>::infinity());
  std::vector<double> vmax(d, -std::numeric_limits<double>::infinity());
  std::vector<double> wmax(d, 0.0);
  std::size_t steps = 0;

  std::vector<double> lo(d), hi(d);
  auto note_velocity = [&](const std::vector<double>& vv) {
    for (std::size_t q = 0; q < d; ++q) lo[q] = hi[q] = vv[q];
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t q = 0; q < d; ++q) {
        lo[q] = std::min(lo[q], vv[i * d + q]);
        hi[q] = std::max(hi[q], vv[i * d + q]);
      }
    for (std::size_t q = 0; q < d; ++q) {
      vmin[q] = std::min(vmin[q], lo[q]);
      vmax[q] = std::max(vmax[q], hi[q]);
      wmax[q] = std::max(wmax[q], hi[q] - lo[q]);
    }
  };
  auto merge_worst = [&](const Audit& a) {
    worst.mass_in_omega = std::max(worst.mass_in_omega, a.mass_in_omega);
    worst.omega_volume = std::max(worst.omega_volume, a.omega_volume);
    worst.u_sup = std::max(worst.u_sup, a.u_sup);
    worst.control_drive = std::max(worst.control_drive, std::abs(a.control_drive));
  };
  auto record = [&](double t, const Ensemble& e, const Audit& a, long piece) {
    samples.push_back(Sample{t, box_of(e), flocking_metrics(e), a, piece});
    if (opts.keep_snapshots) snaps.push_back(e);
  };

  const auto segs = build_segments(plan, t0, t1);
  {
    const ControlPiece* p0 =
        (!segs.empty() && segs.front().piece >= 0) ? &plan.pieces()[segs.front().piece] : nullptr;
    const Audit a = audit_state(e0, p0, t0);
    merge_worst(a);
    note_velocity(v);
    record(t0, e0, a, p0 ? segs.front().piece : -1);
  }

  for (const auto& seg : segs) {
    const ControlPiece* piece = seg.piece >= 0 ? &plan.pieces()[seg.piece] : nullptr;
    const double dt_abs = (piece && piece->dt > 0.0) ? piece->dt : opts.dt_max;
    const double span = std::abs(seg.b - seg.a);
    const double dir = seg.b >= seg.a ? 1.0 : -1.0;
    std::size_t m = static_cast<std::size_t>(std::ceil(span / dt_abs - 1e-9));
    if (m == 0) m = 1;
    const double dt = dir * dt_abs;

    for (std::size_t s = 0; s < m; ++s) {
      const double ta = seg.a + static_cast<double>(s) * dt;
      const double tb = (s + 1 == m) ? seg.b : seg.a + static_cast<double>(s + 1) * dt;
      const double h = tb - ta;
      const double hh = 0.5 * h;
      const double h6 = h / 6.0;

      rhs(k, d, n, ta, x.data(), v.data(), w, piece, opts.backend, k1x.data(), k1v.data());
      for (std::size_t q = 0; q < len; ++q) {
        sx[q] = x[q] + hh * k1x[q];
        sv[q] = v[q] + hh * k1v[q];
      }
      rhs(k, d, n, ta + hh, sx.data(), sv.data(), w, piece, opts.backend, k2x.data(), k2v.data());
      for (std::size_t q = 0; q < len; ++q) {
        sx[q] = x[q] + hh * k2x[q];
        sv[q] = v[q] + hh * k2v[q];
      }
      rhs(k, d, n, ta + hh, sx.data(), sv.data(), w, piece, opts.backend, k3x.data(), k3v.data());
      for (std::size_t q = 0; q < len; ++q) {
        sx[q] = x[q] + h * k3x[q];
        sv[q] = v[q] + h * k3v[q];
      }
      rhs(k, d, n, ta + h, sx.data(), sv.data(), w, piece, opts.backend, k4x.data(), k4v.data());
      for (std::size_t q = 0; q < len; ++q) {
        sx[q] = x[q] + h6 * (k1x[q] + 2.0 * k2x[q] + 2.0 * k3x[q] + k4x[q]);
        sv[q] = v[q] + h6 * (k1v[q] + 2.0 * k2v[q] + 2.0 * k3v[q] + k4v[q]);
      }
      if (!all_finite(sx) || !all_finite(sv)) {
        std::ostringstream os;
        os << "non-finite state while stepping from t = " << ta;
        throw IntegrationError(os.str(), ta, x, v);
      }
      x.swap(sx);
      v.swap(sv);
      ++steps;

      const bool last = (s + 1 == m);
      const bool strided = opts.sample_stride > 0 && steps % opts.sample_stride == 0;
      const bool need_audit = piece != nullptr;
      note_velocity(v);
      if (need_audit || strided || last) {
        Ensemble cur = e0.with_state(x, v);
        const Audit a = audit_state(cur, piece, tb);
        merge_worst(a);
        if (strided || last) record(tb, cur, a, seg.piece);
      }
    }
  }

  return Trajectory{std::move(samples), std::move(snaps), e0.with_state(std::move(x), std::move(v)),
                    worst,           std::move(vmin),  std::move(vmax), std::move(wmax), steps};
}

double decay_rate_estimate(const Trajectory& traj, double t_from) {
  std::vector<std::pair<double, double>> pts;
  bool started = false;
  for (const auto& s : traj.samples) {
    if (s.t < t_from) continue;
    if (!started) {
      started = true;
      if (s.metrics.V < 1e-14) return 0.0;
    }
    if (s.metrics.V >= 1e-14) pts.emplace_back(s.t, std::log(s.metrics.V));
  }
  if (pts.size() < 3) throw DomainError("decay_rate_estimate: fewer than 3 usable samples");
  double mt = 0.0, my = 0.0;
  for (const auto& [t, y] : pts) {
    mt += t;
    my += y;
  }
  mt /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double stt = 0.0, sty = 0.0;
  for (const auto& [t, y] : pts) {
    stt += (t - mt) * (t - mt);
    sty += (t - mt) * (y - my);
  }
  if (stt == 0.0) throw DomainError("decay_rate_estimate: samples share a single time");
  return std::max(0.0, -sty / stt);
}

}  // namespace flock
