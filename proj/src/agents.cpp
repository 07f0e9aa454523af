#include "flock/agents.hpp"

#include <cmath>

#include "flock/detail/pair_kernel.hpp"
#include "flock/error.hpp"

namespace flock {

namespace {

template <class Phi>
void agent_rhs(const Phi& phi, std::size_t d, std::size_t n, double t, const double* x,
               const double* v, const ControlPiece* piece, double* dx, double* dv) {
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      dx[i * d + k] = v[i * d + k];
      dv[i * d + k] = 0.0;
    }
    for (std::size_t j = 0; j < n; ++j) {
      double r2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double dd = x[j * d + k] - x[i * d + k];
        r2 += dd * dd;
      }
      const double f = inv_n * phi(r2);
      for (std::size_t k = 0; k < d; ++k) dv[i * d + k] += f * (v[j * d + k] - v[i * d + k]);
    }
  }
  if (piece) {
    const std::size_t a = piece->axis();
    for (std::size_t i = 0; i < n; ++i) dv[i * d + a] += piece->force_at(t, x + i * d, v + i * d);
  }
}

}  // namespace

AgentSystem evolve_agents(const Kernel& k, AgentSystem s, const ControlPlan& plan, double t_start,
                          double t_end, double dt_max) {
  if (!(dt_max > 0.0)) throw DomainError("evolve_agents: dt_max must be positive");
  if (!(t_end >= t_start)) throw DomainError("evolve_agents: t_end must not precede t_start");
  const std::size_t d = s.dim, n = s.size();
  if (n == 0 || s.v.size() != s.x.size()) throw DomainError("evolve_agents: bad agent state");
  const std::size_t len = n * d;

  struct Interval {
    double a, b;
    const ControlPiece* piece;
  };
  std::vector<Interval> parts;
  double t = t_start;
  for (const auto& p : plan.pieces()) {
    if (t >= t_end) break;
    if (p.t_end <= t) continue;
    if (p.t_start >= t_end) break;
    if (p.t_start > t) {
      parts.push_back({t, p.t_start, nullptr});
      t = p.t_start;
    }
    const double e = std::min(p.t_end, t_end);
    parts.push_back({t, e, &p});
    t = e;
  }
  if (t < t_end) parts.push_back({t, t_end, nullptr});

  std::vector<double> k1x(len), k1v(len), k2x(len), k2v(len), k3x(len), k3v(len), k4x(len),
      k4v(len), yx(len), yv(len);

  detail::with_pair_kernel(k, [&](const auto& phi) {
    for (const auto& part : parts) {
      const double h0 = (part.piece && part.piece->dt > 0.0) ? part.piece->dt : dt_max;
      std::size_t m = static_cast<std::size_t>(std::ceil((part.b - part.a) / h0 - 1e-9));
      if (m == 0) m = 1;
      for (std::size_t q = 0; q < m; ++q) {
        const double ta = part.a + static_cast<double>(q) * h0;
        const double tb = (q + 1 == m) ? part.b : part.a + static_cast<double>(q + 1) * h0;
        const double h = tb - ta;
        agent_rhs(phi, d, n, ta, s.x.data(), s.v.data(), part.piece, k1x.data(), k1v.data());
        for (std::size_t r = 0; r < len; ++r) {
          yx[r] = s.x[r] + 0.5 * h * k1x[r];
          yv[r] = s.v[r] + 0.5 * h * k1v[r];
        }
        agent_rhs(phi, d, n, ta + 0.5 * h, yx.data(), yv.data(), part.piece, k2x.data(), k2v.data());
        for (std::size_t r = 0; r < len; ++r) {
          yx[r] = s.x[r] + 0.5 * h * k2x[r];
          yv[r] = s.v[r] + 0.5 * h * k2v[r];
        }
        agent_rhs(phi, d, n, ta + 0.5 * h, yx.data(), yv.data(), part.piece, k3x.data(), k3v.data());
        for (std::size_t r = 0; r < len; ++r) {
          yx[r] = s.x[r] + h * k3x[r];
          yv[r] = s.v[r] + h * k3v[r];
        }
        agent_rhs(phi, d, n, ta + h, yx.data(), yv.data(), part.piece, k4x.data(), k4v.data());
        for (std::size_t r = 0; r < len; ++r) {
          s.x[r] = s.x[r] + h / 6.0 * (k1x[r] + 2.0 * k2x[r] + 2.0 * k3x[r] + k4x[r]);
          s.v[r] = s.v[r] + h / 6.0 * (k1v[r] + 2.0 * k2v[r] + 2.0 * k3v[r] + k4v[r]);
        }
      }
    }
  });
  return s;
}

}  // namespace flock
