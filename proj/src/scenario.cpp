#include "flock/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "flock/control_mass.hpp"
#include "flock/control_space.hpp"
#include "flock/error.hpp"
#include "flock/flocking.hpp"

namespace flock {

using io::Json;

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::Mass: return "mass";
    case Mode::Volume: return "volume";
    default: return "none";
  }
}

namespace {

class Checker {
 public:
  std::vector<std::string> issues;

  void fail(const std::string& path, const std::string& msg) { issues.push_back(path + ": " + msg); }

  void only_keys(const Json& j, const std::string& path, const std::set<std::string>& allowed) {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!allowed.count(it.key()))
        fail(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
  }

  std::optional<double> real(const Json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) return std::nullopt;
    const Json& v = j.at(key);
    if (!v.is_number()) {
      fail(path, "expected a number");
      return std::nullopt;
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
      fail(path, "must be finite");
      return std::nullopt;
    }
    return x;
  }

  std::optional<std::uint64_t> count(const Json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) return std::nullopt;
    const Json& v = j.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    fail(path, "expected a nonnegative integer");
    return std::nullopt;
  }

  std::vector<double> reals(const Json& v, const std::string& path) {
    std::vector<double> out;
    if (!v.is_array()) {
      fail(path, "expected an array of numbers");
      return out;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
        fail(path + "[" + std::to_string(i) + "]", "expected a finite number");
        continue;
      }
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  // Scalar broadcast to dim, or an array of length dim.
  std::vector<double> per_axis(const Json& j, const std::string& key, const std::string& path,
                               std::size_t dim, double dflt) {
    if (!j.contains(key)) return std::vector<double>(dim, dflt);
    const Json& v = j.at(key);
    if (v.is_number()) {
      auto x = real(j, key, path);
      return std::vector<double>(dim, x.value_or(dflt));
    }
    auto out = reals(v, path);
    if (v.is_array() && v.size() != dim)
      fail(path, "expected " + std::to_string(dim) + " entries, got " + std::to_string(v.size()));
    out.resize(dim, dflt);
    return out;
  }
};

void parse_kernel(Checker& ck, const Json& j, Scenario& s) {
  if (!j.is_object()) {
    ck.fail("kernel", "expected an object");
    return;
  }
  if (!j.contains("family") || !j.at("family").is_string()) {
    ck.fail("kernel.family", "missing or not a string");
    return;
  }
  const std::string fam = j.at("family").get<std::string>();
  try {
    if (fam == "power_law") {
      ck.only_keys(j, "kernel", {"family", "K", "gamma"});
      const auto K = ck.real(j, "K", "kernel.K");
      const auto g = ck.real(j, "gamma", "kernel.gamma");
      if (!j.contains("gamma")) ck.fail("kernel.gamma", "required");
      if (g) s.kernel = Kernel::power_law(K.value_or(1.0), *g);
    } else if (fam == "exponential") {
      ck.only_keys(j, "kernel", {"family", "K", "lambda"});
      const auto K = ck.real(j, "K", "kernel.K");
      const auto l = ck.real(j, "lambda", "kernel.lambda");
      if (!j.contains("lambda")) ck.fail("kernel.lambda", "required");
      if (l) s.kernel = Kernel::exponential(K.value_or(1.0), *l);
    } else if (fam == "tabulated") {
      ck.only_keys(j, "kernel", {"family", "r", "phi"});
      if (!j.contains("r") || !j.contains("phi")) {
        ck.fail("kernel", "tabulated kernel needs r and phi");
        return;
      }
      auto r = ck.reals(j.at("r"), "kernel.r");
      auto p = ck.reals(j.at("phi"), "kernel.phi");
      s.kernel = Kernel::tabulated(std::move(r), std::move(p));
    } else {
      ck.fail("kernel.family", "unknown family \"" + fam + "\"");
    }
  } catch (const DomainError& e) {
    ck.fail("kernel", e.what());
  }
}

void parse_initial(Checker& ck, const Json& root, Scenario& s, bool particles_given) {
  const Json empty = Json::object();
  const Json& j = root.contains("initial") ? root.at("initial") : empty;
  if (!j.is_object()) {
    ck.fail("initial", "expected an object");
    return;
  }
  std::string type = "uniform_box";
  if (j.contains("type")) {
    if (!j.at("type").is_string())
      ck.fail("initial.type", "expected a string");
    else
      type = j.at("type").get<std::string>();
  }
  auto& in = s.initial;
  const std::size_t d = s.dim;
  auto bounds = [&] {
    in.x_lo = ck.per_axis(j, "x_lo", "initial.x_lo", d, 0.0);
    in.x_hi = ck.per_axis(j, "x_hi", "initial.x_hi", d, 1.0);
    in.v_lo = ck.per_axis(j, "v_lo", "initial.v_lo", d, 0.0);
    in.v_hi = ck.per_axis(j, "v_hi", "initial.v_hi", d, 1.0);
    for (std::size_t q = 0; q < d; ++q) {
      if (!(in.x_lo[q] < in.x_hi[q])) ck.fail("initial", "x_lo must be below x_hi on every axis");
      if (!(in.v_lo[q] < in.v_hi[q])) ck.fail("initial", "v_lo must be below v_hi on every axis");
    }
  };
  if (type == "uniform_box") {
    in.kind = InitialSpec::UniformBox;
    ck.only_keys(j, "initial", {"type", "x_lo", "x_hi", "v_lo", "v_hi", "seed"});
    bounds();
    in.seed = ck.count(j, "seed", "initial.seed").value_or(0);
  } else if (type == "grid") {
    in.kind = InitialSpec::Grid;
    ck.only_keys(j, "initial", {"type", "x_lo", "x_hi", "v_lo", "v_hi", "nodes"});
    bounds();
    const auto m = ck.count(j, "nodes", "initial.nodes");
    if (!m || *m == 0) {
      ck.fail("initial.nodes", "grid needs a positive node count per coordinate");
      return;
    }
    in.nodes = *m;
    const double total = std::pow(static_cast<double>(*m), 2.0 * static_cast<double>(d));
    if (total > 1e7) {
      ck.fail("initial.nodes", "grid would exceed 10^7 particles");
      return;
    }
    const auto n = static_cast<std::size_t>(total);
    if (particles_given && s.particles != n)
      ck.fail("particles", "grid of " + std::to_string(*m) + " nodes gives " + std::to_string(n) +
                               " particles, config says " + std::to_string(s.particles));
    s.particles = n;
  } else if (type == "particles") {
    in.kind = InitialSpec::Particles;
    ck.only_keys(j, "initial", {"type", "x", "v", "w"});
    auto rows = [&](const char* key) {
      std::vector<double> out;
      const std::string path = std::string("initial.") + key;
      if (!j.contains(key)) {
        ck.fail(path, "required");
        return out;
      }
      const Json& a = j.at(key);
      if (!a.is_array() || a.empty()) {
        ck.fail(path, "expected a nonempty array");
        return out;
      }
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string pi = path + "[" + std::to_string(i) + "]";
        if (d == 1 && a[i].is_number()) {
          auto r = ck.reals(Json::array({a[i]}), pi);
          out.insert(out.end(), r.begin(), r.end());
          continue;
        }
        auto r = ck.reals(a[i], pi);
        if (a[i].is_array() && a[i].size() != d) ck.fail(pi, "expected " + std::to_string(d) + " entries");
        r.resize(d, 0.0);
        out.insert(out.end(), r.begin(), r.end());
      }
      return out;
    };
    in.x = rows("x");
    in.v = rows("v");
    if (j.contains("w")) in.w = ck.reals(j.at("w"), "initial.w");
    const std::size_t n = in.x.size() / d;
    if (in.v.size() != in.x.size()) ck.fail("initial", "x and v must list the same number of particles");
    if (!in.w.empty() && in.w.size() != n) ck.fail("initial.w", "one weight per particle");
    if (particles_given && s.particles != n)
      ck.fail("particles", "does not match the " + std::to_string(n) + " listed particles");
    s.particles = n;
    if (ck.issues.empty()) {
      try {
        build_ensemble(s);
      } catch (const DomainError& e) {
        ck.fail("initial", e.what());
      }
    }
  } else {
    ck.fail("initial.type", "unknown type \"" + type + "\"");
  }
}

}  // namespace

Scenario validate_config(const Json& j) {
  Checker ck;
  Scenario s;
  if (!j.is_object()) throw ConfigError({"config: expected a JSON object"});
  ck.only_keys(j, "", {"schema_version", "dim", "particles", "kernel", "initial", "mode", "c", "eta",
                       "dt_max", "post_horizon", "safety", "max_steps", "steps_per_step",
                       "sample_stride", "out"});
  if (!j.contains("schema_version"))
    ck.fail("schema_version", "required");
  else if (j.at("schema_version") != io::kSchemaVersion)
    ck.fail("schema_version", "unsupported, expected " + std::to_string(io::kSchemaVersion));

  if (auto d = ck.count(j, "dim", "dim")) {
    if (*d == 0 || *d > 16)
      ck.fail("dim", "must lie in 1..16");
    else
      s.dim = *d;
  }
  const auto np = ck.count(j, "particles", "particles");
  if (np) {
    if (*np == 0)
      ck.fail("particles", "need at least one particle");
    else
      s.particles = *np;
  }

  if (!j.contains("kernel"))
    ck.fail("kernel", "required");
  else
    parse_kernel(ck, j.at("kernel"), s);

  if (j.contains("mode")) {
    const Json& m = j.at("mode");
    const std::string name = m.is_string() ? m.get<std::string>() : "";
    if (name == "none")
      s.mode = Mode::None;
    else if (name == "mass")
      s.mode = Mode::Mass;
    else if (name == "volume")
      s.mode = Mode::Volume;
    else
      ck.fail("mode", "expected one of none, mass, volume");
  }
  if (auto c = ck.real(j, "c", "c")) s.c = *c;
  if (s.mode != Mode::None) {
    if (!j.contains("c"))
      ck.fail("c", "budget is required in mass and volume modes");
    else if (!(s.c > 0.0))
      ck.fail("c", "budget must be positive");
  }
  if (s.mode == Mode::Volume && s.dim != 1)
    ck.fail("mode", "volume mode is implemented in one dimension only");
  if (auto e = ck.real(j, "eta", "eta")) {
    if (!(*e > 0.0))
      ck.fail("eta", "must be positive");
    else
      s.eta = *e;
  }
  if (auto dt = ck.real(j, "dt_max", "dt_max")) {
    if (!(*dt > 0.0))
      ck.fail("dt_max", "must be positive");
    else
      s.dt_max = *dt;
  }
  if (auto h = ck.real(j, "post_horizon", "post_horizon")) {
    if (!(*h > 0.0))
      ck.fail("post_horizon", "must be positive");
    else
      s.post_horizon = *h;
  }
  if (auto f = ck.real(j, "safety", "safety")) {
    if (!(*f > 0.0 && *f <= 1.0))
      ck.fail("safety", "must lie in (0, 1]");
    else
      s.safety = *f;
  }
  if (auto m = ck.count(j, "max_steps", "max_steps")) {
    if (*m == 0)
      ck.fail("max_steps", "must be positive");
    else
      s.max_steps = *m;
  }
  if (auto m = ck.count(j, "steps_per_step", "steps_per_step")) {
    if (*m == 0)
      ck.fail("steps_per_step", "must be positive");
    else
      s.steps_per_step = *m;
  }
  if (auto m = ck.count(j, "sample_stride", "sample_stride")) {
    if (*m == 0)
      ck.fail("sample_stride", "must be positive");
    else
      s.sample_stride = *m;
  }
  if (j.contains("out")) {
    if (!j.at("out").is_string() || j.at("out").get<std::string>().empty())
      ck.fail("out", "expected a nonempty string");
    else
      s.out_dir = j.at("out").get<std::string>();
  }
  if (ck.issues.empty()) parse_initial(ck, j, s, np.has_value());
  if (!ck.issues.empty()) throw ConfigError(ck.issues);
  return s;
}

Scenario validate_config(const char* text) { return validate_config(std::string(text)); }

Scenario validate_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError({"line " + std::to_string(line) + ", column " + std::to_string(col) +
                       ": malformed JSON"});
  }
  return validate_config(j);
}

Ensemble build_ensemble(const Scenario& s) {
  const auto& in = s.initial;
  switch (in.kind) {
    case InitialSpec::Grid:
      return sample::grid(s.dim, in.nodes, in.x_lo, in.x_hi, in.v_lo, in.v_hi);
    case InitialSpec::Particles:
      if (in.w.empty()) return Ensemble::uniform_weights(s.dim, in.x, in.v);
      return Ensemble(s.dim, in.x, in.v, in.w);
    default:
      return sample::uniform_box(s.dim, s.particles, in.x_lo, in.x_hi, in.v_lo, in.v_hi, in.seed);
  }
}

namespace {

Json verdicts(const Kernel& k, const Ensemble& e, double safety) {
  const auto c2 = corollary2_test(k, e);
  return Json{{"radius_test", io::to_json(theorem3_test(k, e))},
              {"box_test", io::to_json(c2)},
              {"box_test_with_safety", passes_with_safety(c2, safety)},
              {"finite_dim", io::to_json(finite_dim_test(k, e))}};
}

Json box_json(const Ensemble& e) {
  Json a = Json::array();
  for (const auto& x : support_box(e).axes) a.push_back(io::to_json(x));
  return a;
}

IntegratorOptions free_options(const Scenario& s, double t0) {
  IntegratorOptions o;
  o.dt_max = s.dt_max;
  o.t_start = t0;
  o.sample_stride = s.sample_stride;
  return o;
}

struct Stage {
  ControlPlan plan;
  std::vector<StepRecord> records;
  std::optional<StrategySummary> summary;
  std::optional<Trajectory> control;
  std::optional<std::string> failure;
};

// Free flight after the plan, summary and artifacts.
RunArtifacts finish(const Scenario& s, const std::string& mode, const Ensemble& e0, Stage st) {
  const Kernel& k = s.kernel;
  const double t_off = st.plan.empty() ? 0.0 : st.plan.t_end();
  std::optional<Trajectory> all;
  detail::append_trajectory(all, std::move(*st.control));
  const Ensemble off = all->final_state;

  Json sum;
  sum["schema_version"] = io::kSchemaVersion;
  sum["kind"] = "run_summary";
  sum["mode"] = mode;
  sum["dim"] = s.dim;
  sum["particles"] = e0.size();
  sum["kernel"] = io::to_json(k);
  sum["c"] = io::number(s.c);
  sum["safety"] = io::number(s.safety);
  sum["dt_max"] = io::number(s.dt_max);
  sum["post_horizon"] = io::number(s.post_horizon);
  sum["steps"] = st.records.size();
  sum["total_control_time"] = io::number(st.plan.total_time());
  sum["control_off_time"] = io::number(t_off);
  sum["eta"] = st.summary ? io::number(st.summary->eta) : Json();
  sum["initial_box"] = box_json(e0);
  sum["terminal_box"] = box_json(off);
  sum["verdicts"] = Json{{"initial", verdicts(k, e0, s.safety)}, {"control_off", verdicts(k, off, s.safety)}};
  sum["strategy"] = st.summary ? io::to_json(*st.summary) : Json();
  sum["audit_worst"] = Json{{"mass_in_omega", io::number(all->worst.mass_in_omega)},
                            {"omega_volume", io::number(all->worst.omega_volume)},
                            {"u_sup", io::number(all->worst.u_sup)},
                            {"max_weight", io::number(e0.max_weight())}};

  RunArtifacts out;
  if (!st.failure) {
    Trajectory flight = integrate_until(k, off, ControlPlan{}, t_off + s.post_horizon, free_options(s, t_off));
    std::optional<double> rate;
    try {
      rate = decay_rate_estimate(flight, t_off);
    } catch (const DomainError&) {
    }
    const auto m_off = flocking_metrics(off);
    const auto m_end = flocking_metrics(flight.final_state);
    const auto th = theorem3_test(k, off);
    Json decay{{"rate", rate ? io::number(*rate) : Json()}};
    decay["reference"] = th.X_M ? io::number(k(2.0 * *th.X_M)) : Json();
    decay["Lambda_off"] = io::number(m_off.Lambda);
    decay["Lambda_final"] = io::number(m_end.Lambda);
    decay["Lambda_ratio"] = m_off.Lambda > 0.0 ? io::number(m_end.Lambda / m_off.Lambda) : Json();
    decay["X_max"] = [&] {
      double x = 0.0;
      for (const auto& smp : flight.samples) x = std::max(x, smp.metrics.X);
      return io::number(x);
    }();
    sum["free_flight"] = std::move(decay);
    sum["verdicts"]["final"] = verdicts(k, flight.final_state, s.safety);
    const bool c2 = passes_with_safety(corollary2_test(k, off), s.safety);
    out.success = c2 && rate && *rate > 0.0;
    detail::append_trajectory(all, std::move(flight));
  } else {
    sum["free_flight"] = Json();
  }
  sum["success"] = out.success;
  sum["failure"] = st.failure ? Json(*st.failure) : Json();
  Json recs = Json::array();
  for (const auto& r : st.records) recs.push_back(io::to_json(r));
  sum["records"] = std::move(recs);

  out.failure = st.failure;
  out.trajectory_csv = io::trajectory_csv(*all, s.dim);
  out.summary_json = io::dump(sum);
  out.plan_json = io::dump(io::plan_to_json(st.plan, s.dim));
  return out;
}

// Step by step, as the strategies integrate, so samples and strides line up.
Trajectory integrate_plan(const Scenario& s, const Ensemble& e0, const ControlPlan& plan) {
  std::optional<Trajectory> acc;
  acc = detail::trivial_trajectory(e0, plan.empty() ? 0.0 : plan.t_begin());
  const auto& pieces = plan.pieces();
  for (std::size_t i = 0; i < pieces.size();) {
    ControlPlan step;
    std::size_t j = i;
    for (; j < pieces.size() && pieces[j].step_index == pieces[i].step_index; ++j) step.append(pieces[j]);
    Trajectory part = integrate_until(s.kernel, acc->final_state, step, step.t_end(),
                                      free_options(s, step.t_begin()));
    detail::append_trajectory(acc, std::move(part), static_cast<long>(i));
    i = j;
  }
  return std::move(*acc);
}

ControlPlan parse_plan(const std::string& text, std::size_t dim) {
  try {
    return io::plan_from_json(Json::parse(text), dim);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError({std::string("plan: ") + e.what()});
  }
}

}  // namespace

RunArtifacts run_scenario(const Scenario& s) {
  const Ensemble e0 = build_ensemble(s);
  StrategyOptions o;
  o.dt_max = s.dt_max;
  o.max_steps = s.max_steps;
  o.steps_per_step = s.steps_per_step;
  o.sample_stride = s.sample_stride;
  Stage st;
  if (s.mode == Mode::None) {
    st.control = detail::trivial_trajectory(e0, 0.0);
    return finish(s, mode_name(s.mode), e0, std::move(st));
  }
  try {
    StrategyResult r = s.mode == Mode::Volume ? complete_strategy_space(s.kernel, e0, s.c, s.eta, o)
                       : s.dim == 1          ? complete_strategy_1d(s.kernel, e0, s.c, s.eta, o)
                                             : complete_strategy_multi_d(s.kernel, e0, s.c, s.eta, o);
    st.plan = std::move(r.plan);
    st.records = std::move(r.records);
    st.summary = std::move(r.summary);
    st.control = std::move(r.trajectory);
  } catch (const StrategyError& err) {
    st.plan = err.plan();
    st.records = err.records();
    st.failure = err.what();
    st.control = integrate_plan(s, e0, st.plan);
  } catch (const DegenerateMeasure& err) {
    st.failure = err.what();
    st.control = detail::trivial_trajectory(e0, 0.0);
  } catch (const IntegrationError& err) {
    st.failure = err.what();
    st.control = detail::trivial_trajectory(e0, 0.0);
  }
  return finish(s, mode_name(s.mode), e0, std::move(st));
}

Trajectory replay_plan(const std::string& plan_json, const Scenario& s) {
  const Ensemble e0 = build_ensemble(s);
  const ControlPlan plan = parse_plan(plan_json, s.dim);
  std::optional<Trajectory> all;
  detail::append_trajectory(all, integrate_plan(s, e0, plan));
  const double t_off = plan.empty() ? 0.0 : plan.t_end();
  detail::append_trajectory(all, integrate_until(s.kernel, all->final_state, ControlPlan{},
                                                 t_off + s.post_horizon, free_options(s, t_off)));
  return std::move(*all);
}

RunArtifacts replay_scenario(const std::string& plan_json, const Scenario& s) {
  const Ensemble e0 = build_ensemble(s);
  Stage st;
  st.plan = parse_plan(plan_json, s.dim);
  st.control = integrate_plan(s, e0, st.plan);
  return finish(s, "replay", e0, std::move(st));
}

void write_artifacts(const RunArtifacts& a, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto put = [&](const char* name, const std::string& text) {
    const fs::path p = fs::path(dir) / name;
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f) throw std::runtime_error("cannot write " + p.string());
  };
  put("trajectory.csv", a.trajectory_csv);
  put("summary.json", a.summary_json);
  put("plan.json", a.plan_json);
}

}  // namespace flock
