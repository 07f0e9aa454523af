#include "flock/control_mass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "flock/error.hpp"

namespace flock {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kContractionSlack = 1e-6;
constexpr double kBoxSlack = 1e-6;
constexpr double kBoundSlack = 1e-3;

struct EpsChoice {
  double eps;
  double floor;
  bool floored;
};

// Largest breakpoint of ε ↦ max_i μ([x_{i−1} − 3ε, x_i + 3ε]) at which every slab holds
// at most c. Coordinates are taken from the normalized ensemble on `axis`.
EpsChoice choose_eps(const Ensemble& en, std::size_t axis, const std::vector<double>& cuts,
                     double c, double cap) {
  const std::size_t n = cuts.size() - 1;
  const std::size_t N = en.size();
  const double mass_tol = 1e-12;

  double min_gap = kInf;
  for (std::size_t i = 1; i <= n; ++i) {
    const double g = cuts[i] - cuts[i - 1];
    if (g > 0.0) min_gap = std::min(min_gap, g);
  }
  const double floor = std::isfinite(min_gap) ? 1e-3 * 0.5 * min_gap : 0.0;

  double first_violation = kInf;
  std::vector<double> feasible_bps;
  std::vector<std::pair<double, double>> entries;
  for (std::size_t i = 1; i <= n; ++i) {
    const double lo = cuts[i - 1], hi = cuts[i];
    double m = 0.0;
    entries.clear();
    for (std::size_t p = 0; p < N; ++p) {
      const double y = en.x(p, axis);
      if (y >= lo && y <= hi)
        m += en.w(p);
      else
        entries.emplace_back((y < lo ? lo - y : y - hi) / 3.0, en.w(p));
    }
    if (m > c + mass_tol) {
      std::ostringstream os;
      os << "slice " << i << " already holds mass " << m << " > c = " << c
         << " before widening (atom or clustered support on axis " << axis << ")";
      throw DegenerateMeasure(os.str());
    }
    std::sort(entries.begin(), entries.end());
    std::size_t q = 0;
    while (q < entries.size()) {
      const double b = entries[q].first;
      while (q < entries.size() && entries[q].first == b) m += entries[q++].second;
      if (m > c + mass_tol) {
        first_violation = std::min(first_violation, b);
        break;
      }
      feasible_bps.push_back(b);
    }
  }

  if (!std::isfinite(first_violation)) return {cap, floor, false};

  double eps = 0.0;
  for (double b : feasible_bps)
    if (b < first_violation) eps = std::max(eps, b);
  eps = std::min(eps, cap);
  if (eps > 0.0 && eps >= floor) return {eps, floor, false};
  if (floor > 0.0 && first_violation > floor) return {floor, floor, true};
  std::ostringstream os;
  os.precision(17);
  os << "no positive slab widening keeps every extended slice within c = " << c
     << " (first violation at eps = " << first_violation << ", floor " << floor << ")";
  throw DegenerateMeasure(os.str());
}

StepParams params_on_axis(const Kernel& k, const Ensemble& e, std::size_t axis, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("mass budget c must be positive");
  if (axis >= e.dim()) throw DomainError("control axis out of range");
  const SupportBox box = support_box(e);
  StepParams p;
  p.axis = axis;
  p.c = c;
  p.frame = box.frame;
  p.Y0 = box.Y(axis);
  p.W0 = box.W(axis);
  if (!(p.W0 > 0.0)) {
    std::ostringstream os;
    os << "velocity support on axis " << axis << " has zero width";
    throw AlreadyFlocked(os.str());
  }
  const Ensemble en = normalize(e, box.frame);
  p.vbar0 = std::clamp(barycenters(en).vbar[axis], 0.0, p.W0);

  double diag2 = 0.0;
  for (std::size_t l = 0; l < e.dim(); ++l) {
    const double s = box.Y(l) + box.W(l);
    diag2 += s * s;
  }
  p.diameter = std::sqrt(diag2);

  const double p0 = k(0.0);
  const double pD = k(p.diameter);
  const double inner = p0 / (p0 + pD);
  const double outer = pD / (p0 + pD) / 3.0;
  p.alpha_plus = inner * (p.W0 - p.vbar0);
  p.alpha_minus = inner * p.vbar0;
  p.beta_plus = outer * (p.W0 - p.vbar0);
  p.beta_minus = outer * p.vbar0;
  p.alpha0 = std::max(p.alpha_plus, p.alpha_minus);
  p.beta0 = std::max(p.beta_plus, p.beta_minus);
  if (!(p.beta0 > 0.0)) throw DegenerateMeasure("beta0 vanished with a positive velocity extent");
  p.div_bound = 1.0 / p.beta0 + 1.0;

  p.n = slice_count(c);
  p.target_mass = std::min(0.5 * c, 1.0);
  auto q = mass_quantile_cuts(en, axis, p.target_mass, p.n);
  p.cuts = std::move(q.cuts);
  p.slice_mass = std::move(q.slice_mass);
  p.heavy_atom = q.heavy_atom;

  const auto eps = choose_eps(en, axis, p.cuts, c, p.Y0 + p.W0);
  p.eps0 = eps.eps;
  p.eps_floor = eps.floor;
  p.eps_floored = eps.floored;
  p.T0 = std::min({p.eps0 / p.W0, p.beta0 / (2.0 * c), 1.0});
  return p;
}

void finish_summary(const Kernel& k, StrategyResult& r, const Ensemble& e0) {
  auto& s = r.summary;
  const SupportBox b0 = support_box(e0);
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
    s.drift_ok = s.drift_ok && rec.drift_ok;
    s.box_ok = s.box_ok && rec.box_ok;
  }
  s.time_ok = s.total_time <= s.time_bound + kBoundSlack;
  s.Y_ok = true;
  for (std::size_t j = 0; j < b1.axes.size(); ++j)
    s.Y_ok = s.Y_ok && b1.Y(j) <= s.Y_bound[j] + kBoundSlack;
  s.terminal = corollary2_test(k, r.trajectory.final_state);
}

}  // namespace

std::size_t slice_count(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("mass budget c must be positive");
  const double r = std::ceil(2.0 / c - 1e-12);
  return static_cast<std::size_t>(std::max(1.0, r));
}

StepParams step_params_1d(const Kernel& k, const Ensemble& e, double c) {
  if (e.dim() != 1) throw DomainError("step_params_1d needs a one-dimensional ensemble");
  return params_on_axis(k, e, 0, c);
}

StepParams multi_d_params(const Kernel& k, const Ensemble& e, std::size_t axis, double c) {
  return params_on_axis(k, e, axis, c);
}

ControlPiece build_control_piece(const StepParams& p, std::size_t slice, double t_step,
                                 std::size_t step_index, double dt) {
  if (slice < 1 || slice > p.n) throw DomainError("slice index out of range");
  const double n = static_cast<double>(p.n);
  ControlPiece pc;
  pc.t_start = t_step + static_cast<double>(slice - 1) * p.T0 / n;
  pc.t_end = t_step + static_cast<double>(slice) * p.T0 / n;
  pc.frame = p.frame;
  pc.frame.t_ref = t_step;
  pc.force = SliceForce{p.axis, p.vbar0, p.alpha0, p.beta0, p.eps0, p.cuts[slice - 1], p.cuts[slice]};
  pc.step_index = step_index;
  pc.slice_index = slice;
  pc.dt = dt;
  return pc;
}

StepOutcome fundamental_step(const Kernel& k, const Ensemble& e, std::size_t axis, double c,
                             double t_step, std::size_t step_index, const StrategyOptions& opts) {
  StepParams p = params_on_axis(k, e, axis, c);
  const double dt = detail::step_dt(p.T0, opts);
  ControlPlan fragment;
  for (std::size_t i = 1; i <= p.n; ++i)
    fragment.append(build_control_piece(p, i, t_step, step_index, dt));

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
  const double vbar_orig = p.vbar0 + p.frame.v_offset[axis];
  for (const auto& s : traj.samples)
    rec.max_vbar_drift = std::max(rec.max_vbar_drift, std::abs(s.metrics.vbar[axis] - vbar_orig));
  rec.v_lo_seen = traj.v_min_seen[axis] - p.frame.v_offset[axis];
  rec.v_hi_seen = traj.v_max_seen[axis] - p.frame.v_offset[axis];
  rec.required_decrease = p.T0 / static_cast<double>(p.n);

  const double wmax = e.max_weight();
  rec.contraction_ok = rec.W_after[axis] <= rec.W_before[axis] - rec.required_decrease + kContractionSlack;
  rec.constraint_ok = rec.max_mass_in_omega <= c + 2.0 * wmax && rec.max_u <= 1.0 + 1e-12;
  rec.drift_ok = rec.max_vbar_drift <= 0.5 * p.beta0 * (1.0 + 2.0 * wmax / c) + 1e-9;
  rec.box_ok = rec.v_lo_seen >= -kBoxSlack && rec.v_hi_seen <= p.W0 + kBoxSlack;
  rec.params = std::move(p);

  if (opts.strict && !(rec.contraction_ok && rec.constraint_ok && rec.drift_ok && rec.box_ok)) {
    std::ostringstream os;
    os.precision(17);
    os << "audit failed in step " << step_index << " on axis " << axis << ":";
    if (!rec.contraction_ok)
      os << " contraction (W " << rec.W_before[axis] << " -> " << rec.W_after[axis]
         << ", required decrease " << rec.required_decrease << ")";
    if (!rec.constraint_ok) os << " mass in omega " << rec.max_mass_in_omega;
    if (!rec.drift_ok) os << " barycenter drift " << rec.max_vbar_drift;
    if (!rec.box_ok) os << " velocity box [" << rec.v_lo_seen << ", " << rec.v_hi_seen << "]";
    throw StrategyError(os.str(), {rec}, fragment);
  }
  Ensemble final_state = traj.final_state;
  return StepOutcome{std::move(final_state), std::move(rec), std::move(fragment), std::move(traj)};
}

double eta_mass_1d(const Kernel& k, double Y0, double W0, double c) {
  const double n = static_cast<double>(slice_count(c));
  return 0.5 * tail_integral(k, 2.0 * (Y0 + n * W0 * W0)).value;
}

double eta_mass_multi_d(const Kernel& k, const SupportBox& box, double c) {
  const double n = static_cast<double>(slice_count(c));
  const std::size_t d = box.axes.size();
  double wsum = 0.0;
  for (std::size_t j = 0; j < d; ++j) wsum += box.W(j);
  const double w_star = n * wsum;
  double t2 = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double s = box.Y(j) + box.W(j) * w_star;
    t2 += s * s;
  }
  return tail_integral(k, std::sqrt(t2)).value / (2.0 * std::sqrt(static_cast<double>(d)));
}

namespace {

// Runs steps on `axis` until its velocity extent is ≤ eta; returns sup of the extents of
// axes listed in `watch` over the phase.
double run_phase(const Kernel& k, Ensemble& cur, std::size_t axis, double c, double eta,
                 const StrategyOptions& opts, StrategyResult& r, std::optional<Trajectory>& acc,
                 const std::vector<std::size_t>& watch) {
  double watched = 0.0;
  for (std::size_t l : watch) watched = std::max(watched, support_box(cur).W(l));
  while (support_box(cur).W(axis) > eta) {
    if (r.records.size() >= opts.max_steps) {
      std::ostringstream os;
      os << "step budget of " << opts.max_steps << " exhausted on axis " << axis
         << " with velocity extent " << support_box(cur).W(axis) << " > eta = " << eta;
      throw StrategyError(os.str(), r.records, r.plan);
    }
    const double t = r.plan.empty() ? 0.0 : r.plan.t_end();
    StepOutcome out = [&] {
      try {
        return fundamental_step(k, cur, axis, c, t, r.records.size(), opts);
      } catch (const StrategyError& err) {
        auto hist = r.records;
        hist.insert(hist.end(), err.records().begin(), err.records().end());
        throw StrategyError(err.what(), std::move(hist), r.plan);
      }
    }();
    for (std::size_t l : watch) watched = std::max(watched, out.trajectory.W_max_seen[l]);
    const auto offset = static_cast<long>(r.plan.pieces().size());
    r.plan.append(out.fragment);
    r.records.push_back(std::move(out.record));
    detail::append_trajectory(acc, std::move(out.trajectory), offset);
    cur = std::move(out.after);
  }
  return watched;
}

}  // namespace

StrategyResult complete_strategy_1d(const Kernel& k, const Ensemble& e0, double c,
                                    std::optional<double> eta, const StrategyOptions& opts) {
  if (e0.dim() != 1) throw DomainError("complete_strategy_1d needs a one-dimensional ensemble");
  const std::size_t n = slice_count(c);
  const SupportBox b0 = support_box(e0);
  const double eta_v = eta ? *eta : eta_mass_1d(k, b0.Y(0), b0.W(0), c);
  if (!(eta_v > 0.0)) throw DomainError("eta must be positive");

  StrategyResult r{ControlPlan{}, detail::trivial_trajectory(e0, 0.0), {}, {}};
  std::optional<Trajectory> acc;
  detail::append_trajectory(acc, detail::trivial_trajectory(e0, 0.0));
  Ensemble cur = e0;
  run_phase(k, cur, 0, c, eta_v, opts, r, acc, {});
  r.trajectory = std::move(*acc);

  auto& s = r.summary;
  s.mode = "mass";
  s.eta = eta_v;
  s.time_bound = static_cast<double>(n) * b0.W(0);
  s.Y_bound = {b0.Y(0) + static_cast<double>(n) * b0.W(0) * b0.W(0)};
  finish_summary(k, r, e0);
  return r;
}

StrategyResult complete_strategy_multi_d(const Kernel& k, const Ensemble& e0, double c,
                                         std::optional<double> eta, const StrategyOptions& opts) {
  const SupportBox b0 = support_box(e0);
  const double eta5 = eta_mass_multi_d(k, b0, c);
  if (e0.dim() == 1) {
    StrategyResult r = complete_strategy_1d(k, e0, c, eta, opts);
    r.summary.eta_alt = eta5;
    return r;
  }
  const std::size_t d = e0.dim();
  const double n = static_cast<double>(slice_count(c));
  const double eta_v = eta ? *eta : eta5;
  if (!(eta_v > 0.0)) throw DomainError("eta must be positive");

  double wsum = 0.0;
  for (std::size_t j = 0; j < d; ++j) wsum += b0.W(j);
  const double w_star = n * wsum;

  StrategyResult r{ControlPlan{}, detail::trivial_trajectory(e0, 0.0), {}, {}};
  std::optional<Trajectory> acc;
  detail::append_trajectory(acc, detail::trivial_trajectory(e0, 0.0));
  Ensemble cur = e0;
  std::vector<std::size_t> done;
  for (std::size_t j = 0; j < d; ++j) {
    const double watched = run_phase(k, cur, j, c, eta_v, opts, r, acc, done);
    r.summary.phase_max_prev_W.push_back(watched);
    if (!done.empty()) r.summary.phase_order_ok = r.summary.phase_order_ok && watched <= eta_v + 1e-6;
    done.push_back(j);
  }
  r.trajectory = std::move(*acc);

  auto& s = r.summary;
  s.mode = "mass";
  s.eta = eta_v;
  s.time_bound = w_star;
  double t2 = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    s.Y_bound.push_back(b0.Y(j) + b0.W(j) * w_star);
    t2 += s.Y_bound.back() * s.Y_bound.back();
  }
  finish_summary(k, r, e0);
  s.terminal_surrogate =
      corollary2_test(k, 0.5 * std::sqrt(t2), 0.5 * eta_v * std::sqrt(static_cast<double>(d)));
  return r;
}

}  // namespace flock
