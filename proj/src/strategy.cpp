#include "flock/strategy.hpp"

#include <algorithm>

namespace flock::detail {

void append_trajectory(std::optional<Trajectory>& acc, Trajectory&& part, long piece_offset) {
  for (auto& smp : part.samples)
    if (smp.piece_index >= 0) smp.piece_index += piece_offset;
  if (!acc) {
    acc.emplace(std::move(part));
    return;
  }
  Trajectory& t = *acc;
  const bool drop_first = !part.samples.empty() && !t.samples.empty() &&
                          part.samples.front().t == t.samples.back().t;
  const std::size_t from = drop_first ? 1 : 0;
  if (drop_first && t.samples.back().piece_index < 0 && part.samples.front().piece_index >= 0) {
    t.samples.back() = part.samples.front();
    if (!t.snapshots.empty() && !part.snapshots.empty()) t.snapshots.back() = part.snapshots.front();
  }
  for (std::size_t s = from; s < part.samples.size(); ++s) t.samples.push_back(std::move(part.samples[s]));
  const std::size_t sfrom = (drop_first && !part.snapshots.empty()) ? 1 : 0;
  for (std::size_t s = sfrom; s < part.snapshots.size(); ++s)
    t.snapshots.push_back(std::move(part.snapshots[s]));
  t.final_state = std::move(part.final_state);
  t.worst.mass_in_omega = std::max(t.worst.mass_in_omega, part.worst.mass_in_omega);
  t.worst.omega_volume = std::max(t.worst.omega_volume, part.worst.omega_volume);
  t.worst.u_sup = std::max(t.worst.u_sup, part.worst.u_sup);
  t.worst.control_drive = std::max(t.worst.control_drive, part.worst.control_drive);
  for (std::size_t q = 0; q < t.v_min_seen.size(); ++q) {
    t.v_min_seen[q] = std::min(t.v_min_seen[q], part.v_min_seen[q]);
    t.v_max_seen[q] = std::max(t.v_max_seen[q], part.v_max_seen[q]);
    t.W_max_seen[q] = std::max(t.W_max_seen[q], part.W_max_seen[q]);
  }
  t.rk_steps += part.rk_steps;
}

Trajectory trivial_trajectory(const Ensemble& e, double t) {
  IntegratorOptions io;
  io.t_start = t;
  return integrate(Kernel::power_law(1.0, 0.0), e, ControlPlan{}, 0.0, io);
}

double step_dt(double T0, const StrategyOptions& opts) {
  const double per = T0 / static_cast<double>(std::max<std::size_t>(opts.steps_per_step, 1));
  return std::min(opts.dt_max, per);
}

std::vector<double> extents_Y(const SupportBox& b) {
  std::vector<double> out;
  for (const auto& a : b.axes) out.push_back(a.Y());
  return out;
}

std::vector<double> extents_W(const SupportBox& b) {
  std::vector<double> out;
  for (const auto& a : b.axes) out.push_back(a.W());
  return out;
}

}  // namespace flock::detail
