#include "flock/control_space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "flock/error.hpp"

namespace flock {

namespace {

double band_area(double eps, double Y, double W) { return 4.0 * eps * (Y + eps * W + 2.0 * eps); }

}  // namespace

SpaceStepParams space_step_params(const Kernel& k, const Ensemble& e, double c) {
  if (e.dim() != 1) throw DomainError("the volume-constrained step is one-dimensional");
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("volume budget c must be positive");
  const SupportBox box = support_box(e);
  SpaceStepParams p;
  p.c = c;
  p.frame = box.frame;
  p.Y0 = box.Y(0);
  p.W0 = box.W(0);
  if (!(p.W0 > 0.0)) throw AlreadyFlocked("velocity support has zero width");
  const Ensemble en = normalize(e, box.frame);
  p.vbar0 = std::clamp(barycenters(en).vbar[0], 0.0, p.W0);

  const double D = p.Y0 + p.W0;
  const double p0 = k(0.0), pD = k(D);
  p.alpha0 = p0 / (p0 + pD) * (p.W0 - p.vbar0);
  p.beta0 = pD / (p0 + pD) / 3.0 * (p.W0 - p.vbar0);
  if (!(p.beta0 > 0.0))
    throw DegenerateMeasure("barycenter sits on the upper velocity edge; beta0 vanished");

  const double vol_term =
      (std::sqrt(p.Y0 * p.Y0 + 2.0 * c * (p.W0 + 1.0)) - p.Y0) / (2.0 * (p.W0 + 2.0));
  p.eps_stated = std::min(0.5 * p.beta0, vol_term);
  p.eps0 = p.eps_stated;
  if (band_area(p.eps0, p.Y0, p.W0) > c) {
    p.shrunk = true;
    double lo = 0.0, hi = p.eps0;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (band_area(mid, p.Y0, p.W0) <= c)
        lo = mid;
      else
        hi = mid;
    }
    p.eps0 = lo;
  }
  if (!(p.eps0 > 0.0)) throw DegenerateMeasure("volume step width vanished");
  p.T0 = p.eps0;
  p.area = band_area(p.eps0, p.Y0, p.W0);
  const BandForce f{p.Y0, p.W0, p.eps0};
  p.omega = f.region().front();
  return p;
}

double space_force(const SpaceStepParams& p, double x, double v) {
  return BandForce{p.Y0, p.W0, p.eps0}.value(x, v);
}

StepOutcome fundamental_step_space(const Kernel& k, const Ensemble& e, double c, double t_step,
                                   std::size_t step_index, const StrategyOptions& opts) {
  SpaceStepParams p = space_step_params(k, e, c);
  ControlPiece pc;
  pc.t_start = t_step;
  pc.t_end = t_step + p.T0;
  pc.frame = p.frame;
  pc.frame.t_ref = t_step;
  pc.force = BandForce{p.Y0, p.W0, p.eps0};
  pc.step_index = step_index;
  pc.slice_index = 1;
  pc.dt = detail::step_dt(p.T0, opts);
  ControlPlan fragment;
  fragment.append(pc);

  IntegratorOptions io;
  io.dt_max = opts.dt_max;
  io.t_start = t_step;
  io.sample_stride = opts.sample_stride;
  io.keep_snapshots = opts.keep_snapshots;
  io.backend = opts.backend;
  Trajectory traj = integrate_until(k, e, fragment, fragment.t_end(), io);

  const SupportBox before = support_box(e);
  const SupportBox after = support_box(traj.final_state);
  StepRecord rec;
  rec.index = step_index;
  rec.t_start = t_step;
  rec.t_end = fragment.t_end();
  rec.W_before = detail::extents_W(before);
  rec.W_after = detail::extents_W(after);
  rec.Y_before = detail::extents_Y(before);
  rec.Y_after = detail::extents_Y(after);
  rec.max_mass_in_omega = traj.worst.mass_in_omega;
  rec.max_omega_volume = traj.worst.omega_volume;
  rec.max_u = traj.worst.u_sup;
  const double vbar_orig = p.vbar0 + p.frame.v_offset[0];
  for (const auto& s : traj.samples)
    rec.max_vbar_drift = std::max(rec.max_vbar_drift, std::abs(s.metrics.vbar[0] - vbar_orig));
  rec.v_lo_seen = traj.v_min_seen[0] - p.frame.v_offset[0];
  rec.v_hi_seen = traj.v_max_seen[0] - p.frame.v_offset[0];
  rec.required_decrease = p.eps0;
  rec.contraction_ok = rec.W_after[0] <= rec.W_before[0] - p.eps0 + 1e-6;
  rec.constraint_ok = rec.max_omega_volume <= c && rec.max_u <= 1.0 + 1e-12;
  rec.box_ok = rec.v_lo_seen >= -1e-6 && rec.v_hi_seen <= p.W0 + 1e-6;
  rec.spatial_ok = rec.Y_after[0] <= p.Y0 + p.eps0 * p.W0 + 1e-6;
  rec.params = std::move(p);

  if (opts.strict && !(rec.contraction_ok && rec.constraint_ok && rec.box_ok && rec.spatial_ok)) {
    std::ostringstream os;
    os.precision(17);
    os << "audit failed in volume step " << step_index << ":";
    if (!rec.contraction_ok)
      os << " contraction (W " << rec.W_before[0] << " -> " << rec.W_after[0] << ", eps "
         << rec.required_decrease << ")";
    if (!rec.constraint_ok) os << " omega volume " << rec.max_omega_volume;
    if (!rec.box_ok) os << " velocity box [" << rec.v_lo_seen << ", " << rec.v_hi_seen << "]";
    if (!rec.spatial_ok) os << " spatial extent " << rec.Y_after[0];
    throw StrategyError(os.str(), {rec}, fragment);
  }
  Ensemble final_state = traj.final_state;
  return StepOutcome{std::move(final_state), std::move(rec), std::move(fragment), std::move(traj)};
}

double eta_space(const Kernel& k, double Y0, double W0) {
  return 0.5 * tail_integral(k, 2.0 * (Y0 + W0 * W0)).value;
}

StrategyResult complete_strategy_space(const Kernel& k, const Ensemble& e0, double c,
                                       std::optional<double> eta, const StrategyOptions& opts) {
  if (e0.dim() != 1) throw DomainError("the volume-constrained strategy is one-dimensional");
  const SupportBox b0 = support_box(e0);
  const double eta_v = eta ? *eta : eta_space(k, b0.Y(0), b0.W(0));
  if (!(eta_v > 0.0)) throw DomainError("eta must be positive");

  StrategyResult r{ControlPlan{}, detail::trivial_trajectory(e0, 0.0), {}, {}};
  std::optional<Trajectory> acc;
  detail::append_trajectory(acc, detail::trivial_trajectory(e0, 0.0));
  Ensemble cur = e0;
  while (support_box(cur).W(0) > eta_v) {
    if (r.records.size() >= opts.max_steps) {
      std::ostringstream os;
      os << "step budget of " << opts.max_steps << " exhausted with velocity extent "
         << support_box(cur).W(0) << " > eta = " << eta_v;
      throw StrategyError(os.str(), r.records, r.plan);
    }
    const double t = r.plan.empty() ? 0.0 : r.plan.t_end();
    StepOutcome out = [&] {
      try {
        return fundamental_step_space(k, cur, c, t, r.records.size(), opts);
      } catch (const StrategyError& err) {
        auto hist = r.records;
        hist.insert(hist.end(), err.records().begin(), err.records().end());
        throw StrategyError(err.what(), std::move(hist), r.plan);
      }
    }();
    const auto offset = static_cast<long>(r.plan.pieces().size());
    r.plan.append(out.fragment);
    r.records.push_back(std::move(out.record));
    detail::append_trajectory(acc, std::move(out.trajectory), offset);
    cur = std::move(out.after);
  }
  r.trajectory = std::move(*acc);

  auto& s = r.summary;
  s.mode = "volume";
  s.eta = eta_v;
  s.time_bound = b0.W(0);
  s.Y_bound = {b0.Y(0) + b0.W(0) * b0.W(0)};
  const SupportBox b1 = support_box(r.trajectory.final_state);
  s.initial_box = b0.axes;
  s.terminal_box = b1.axes;
  s.steps = r.records.size();
  s.total_time = r.plan.total_time();
  s.worst_mass_in_omega = r.trajectory.worst.mass_in_omega;
  s.worst_omega_volume = r.trajectory.worst.omega_volume;
  s.worst_u = r.trajectory.worst.u_sup;
  s.max_weight = e0.max_weight();
  for (const auto& rec : r.records) {
    s.contraction_ok = s.contraction_ok && rec.contraction_ok;
    s.constraint_ok = s.constraint_ok && rec.constraint_ok;
    s.box_ok = s.box_ok && rec.box_ok && rec.spatial_ok;
  }
  s.time_ok = s.total_time <= s.time_bound + 1e-3;
  s.Y_ok = b1.Y(0) <= s.Y_bound[0] + 1e-3;
  s.terminal = corollary2_test(k, r.trajectory.final_state);
  return r;
}

}  // namespace flock
