#include "flock/io.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "flock/error.hpp"

namespace flock::io {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_header(std::size_t dim) {
  std::string h = "t";
  for (std::size_t j = 1; j <= dim; ++j) {
    const std::string s = std::to_string(j);
    h += ",Y_" + s + ",a_" + s + ",W_" + s;
  }
  h += ",X,V,Lambda";
  for (std::size_t j = 1; j <= dim; ++j) h += ",vbar_" + std::to_string(j);
  h += ",mass_in_omega,omega_volume,u_sup,piece_index";
  return h;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, std::size_t dim) {
  os << csv_header(dim) << '\n';
  for (const auto& s : traj.samples) {
    if (s.box.size() != dim) throw DomainError("trajectory dimension mismatch");
    os << format_double(s.t);
    for (const auto& a : s.box)
      os << ',' << format_double(a.Y()) << ',' << format_double(a.v_lo) << ','
         << format_double(a.W());
    os << ',' << format_double(s.metrics.X) << ',' << format_double(s.metrics.V) << ','
       << format_double(s.metrics.Lambda);
    for (double vb : s.metrics.vbar) os << ',' << format_double(vb);
    os << ',' << format_double(s.audit.mass_in_omega) << ',' << format_double(s.audit.omega_volume)
       << ',' << format_double(s.audit.u_sup) << ',' << s.piece_index << '\n';
  }
}

std::string trajectory_csv(const Trajectory& traj, std::size_t dim) {
  std::ostringstream os;
  write_trajectory_csv(os, traj, dim);
  return os.str();
}

Json number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

double to_double(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ConfigError({"expected a number, got " + j.dump()});
}

namespace {

Json numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

std::vector<double> doubles(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError({what + ": expected an array"});
  std::vector<double> out;
  for (const auto& x : j) out.push_back(to_double(x));
  return out;
}

Json frame_json(const Frame& f) {
  return Json{{"x_offset", numbers(f.x_offset)},
              {"v_offset", numbers(f.v_offset)},
              {"t_ref", number(f.t_ref)}};
}

Json box_json(const AxisBox& b) {
  return Json{{"axis", b.axis},
              {"x_lo", number(b.x_lo)},
              {"x_hi", number(b.x_hi)},
              {"v_lo", number(b.v_lo)},
              {"v_hi", number(b.v_hi)}};
}

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError({where + ": missing \"" + key + "\""});
  return j.at(key);
}

}  // namespace

Json to_json(const Kernel& k) {
  return k.visit([](const auto& f) -> Json {
    using T = std::decay_t<decltype(f)>;
    if constexpr (std::is_same_v<T, PowerLaw>)
      return Json{{"family", "power_law"}, {"K", number(f.K)}, {"gamma", number(f.gamma)}};
    else if constexpr (std::is_same_v<T, Exponential>)
      return Json{{"family", "exponential"}, {"K", number(f.K)}, {"lambda", number(f.lambda)}};
    else
      return Json{{"family", "tabulated"}, {"r", numbers(f.r)}, {"phi", numbers(f.phi)}};
  });
}

Json to_json(const FlockingVerdict& v) {
  Json j{{"in_region", v.in_region}, {"threshold", number(v.threshold)}, {"margin", number(v.margin)}};
  j["X_M"] = v.X_M ? number(*v.X_M) : Json();
  return j;
}

Json to_json(const AxisExtent& a) {
  return Json{{"Y", number(a.Y())}, {"a", number(a.v_lo)}, {"W", number(a.W())},
              {"x_lo", number(a.x_lo)}, {"x_hi", number(a.x_hi)},
              {"v_lo", number(a.v_lo)}, {"v_hi", number(a.v_hi)}};
}

Json to_json(const StepRecord& r) {
  Json j{{"index", r.index}, {"t_start", number(r.t_start)}, {"t_end", number(r.t_end)}};
  std::visit(
      [&j](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        Json q;
        if constexpr (std::is_same_v<T, StepParams>) {
          q = Json{{"kind", "mass"},         {"axis", p.axis},
                   {"c", number(p.c)},       {"frame", frame_json(p.frame)},
                   {"Y0", number(p.Y0)},     {"W0", number(p.W0)},
                   {"vbar0", number(p.vbar0)}, {"diameter", number(p.diameter)},
                   {"alpha_plus", number(p.alpha_plus)}, {"alpha_minus", number(p.alpha_minus)},
                   {"beta_plus", number(p.beta_plus)},   {"beta_minus", number(p.beta_minus)},
                   {"alpha0", number(p.alpha0)}, {"beta0", number(p.beta0)},
                   {"n", p.n},               {"target_mass", number(p.target_mass)},
                   {"cuts", numbers(p.cuts)}, {"slice_mass", numbers(p.slice_mass)},
                   {"heavy_atom", p.heavy_atom}, {"eps0", number(p.eps0)},
                   {"eps_floor", number(p.eps_floor)}, {"eps_floored", p.eps_floored},
                   {"T0", number(p.T0)},     {"div_bound", number(p.div_bound)}};
        } else {
          q = Json{{"kind", "volume"},       {"c", number(p.c)},
                   {"frame", frame_json(p.frame)}, {"Y0", number(p.Y0)},
                   {"W0", number(p.W0)},     {"vbar0", number(p.vbar0)},
                   {"alpha0", number(p.alpha0)}, {"beta0", number(p.beta0)},
                   {"eps_stated", number(p.eps_stated)}, {"eps0", number(p.eps0)},
                   {"shrunk", p.shrunk},     {"T0", number(p.T0)},
                   {"area", number(p.area)}, {"omega", box_json(p.omega)}};
        }
        j["params"] = std::move(q);
      },
      r.params);
  j["W_before"] = numbers(r.W_before);
  j["W_after"] = numbers(r.W_after);
  j["Y_before"] = numbers(r.Y_before);
  j["Y_after"] = numbers(r.Y_after);
  j["max_mass_in_omega"] = number(r.max_mass_in_omega);
  j["max_omega_volume"] = number(r.max_omega_volume);
  j["max_u"] = number(r.max_u);
  j["max_vbar_drift"] = number(r.max_vbar_drift);
  j["v_lo_seen"] = number(r.v_lo_seen);
  j["v_hi_seen"] = number(r.v_hi_seen);
  j["required_decrease"] = number(r.required_decrease);
  j["contraction_ok"] = r.contraction_ok;
  j["constraint_ok"] = r.constraint_ok;
  j["drift_ok"] = r.drift_ok;
  j["box_ok"] = r.box_ok;
  j["spatial_ok"] = r.spatial_ok;
  return j;
}

Json to_json(const StrategySummary& s) {
  Json j{{"mode", s.mode}, {"steps", s.steps}, {"total_time", number(s.total_time)},
         {"eta", number(s.eta)}};
  j["eta_alt"] = s.eta_alt ? number(*s.eta_alt) : Json();
  j["time_bound"] = number(s.time_bound);
  j["Y_bound"] = numbers(s.Y_bound);
  Json ib = Json::array(), tb = Json::array();
  for (const auto& a : s.initial_box) ib.push_back(to_json(a));
  for (const auto& a : s.terminal_box) tb.push_back(to_json(a));
  j["initial_box"] = std::move(ib);
  j["terminal_box"] = std::move(tb);
  j["worst_mass_in_omega"] = number(s.worst_mass_in_omega);
  j["worst_omega_volume"] = number(s.worst_omega_volume);
  j["worst_u"] = number(s.worst_u);
  j["max_weight"] = number(s.max_weight);
  j["contraction_ok"] = s.contraction_ok;
  j["constraint_ok"] = s.constraint_ok;
  j["drift_ok"] = s.drift_ok;
  j["box_ok"] = s.box_ok;
  j["time_ok"] = s.time_ok;
  j["Y_ok"] = s.Y_ok;
  j["phase_order_ok"] = s.phase_order_ok;
  j["phase_max_prev_W"] = numbers(s.phase_max_prev_W);
  j["terminal"] = to_json(s.terminal);
  j["terminal_surrogate"] = s.terminal_surrogate ? to_json(*s.terminal_surrogate) : Json();
  return j;
}

Json plan_to_json(const ControlPlan& plan, std::size_t dim) {
  Json pieces = Json::array();
  for (const auto& p : plan.pieces()) {
    Json pj{{"t_start", number(p.t_start)}, {"t_end", number(p.t_end)},
            {"step_index", p.step_index},   {"slice_index", p.slice_index},
            {"dt", number(p.dt)},           {"frame", frame_json(p.frame)}};
    pj["force"] = std::visit(
        [](const auto& f) -> Json {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, SliceForce>)
            return Json{{"type", "slice"},          {"axis", f.axis},
                        {"vbar0", number(f.vbar0)}, {"alpha0", number(f.alpha0)},
                        {"beta0", number(f.beta0)}, {"eps0", number(f.eps0)},
                        {"x_left", number(f.x_left)}, {"x_right", number(f.x_right)}};
          else
            return Json{{"type", "band"}, {"Y0", number(f.Y0)}, {"W0", number(f.W0)},
                        {"eps0", number(f.eps0)}};
        },
        p.force);
    Json region = Json::array();
    for (const auto& b : p.region()) region.push_back(box_json(b));
    pj["region"] = std::move(region);
    pieces.push_back(std::move(pj));
  }
  return Json{{"schema_version", kSchemaVersion},
              {"kind", "control_plan"},
              {"dim", dim},
              {"pieces", std::move(pieces)}};
}

ControlPlan plan_from_json(const Json& j, std::size_t dim) {
  if (!j.is_object()) throw ConfigError({"plan: expected a JSON object"});
  std::vector<std::string> issues;
  if (!j.contains("schema_version") || j.at("schema_version") != kSchemaVersion)
    issues.push_back("plan: schema_version must be " + std::to_string(kSchemaVersion));
  if (!j.contains("kind") || j.at("kind") != "control_plan")
    issues.push_back("plan: kind must be \"control_plan\"");
  if (!j.contains("dim") || !j.at("dim").is_number_unsigned() ||
      j.at("dim").get<std::size_t>() != dim)
    issues.push_back("plan: dim does not match the scenario dimension " + std::to_string(dim));
  if (!j.contains("pieces") || !j.at("pieces").is_array())
    issues.push_back("plan: missing pieces array");
  if (!issues.empty()) throw ConfigError(issues);

  ControlPlan plan;
  std::size_t idx = 0;
  for (const auto& pj : j.at("pieces")) {
    const std::string where = "plan.pieces[" + std::to_string(idx++) + "]";
    ControlPiece p;
    p.t_start = to_double(field(pj, "t_start", where));
    p.t_end = to_double(field(pj, "t_end", where));
    p.step_index = field(pj, "step_index", where).get<std::size_t>();
    p.slice_index = field(pj, "slice_index", where).get<std::size_t>();
    p.dt = to_double(field(pj, "dt", where));
    const Json& fr = field(pj, "frame", where);
    p.frame.x_offset = doubles(field(fr, "x_offset", where + ".frame"), where + ".frame.x_offset");
    p.frame.v_offset = doubles(field(fr, "v_offset", where + ".frame"), where + ".frame.v_offset");
    p.frame.t_ref = to_double(field(fr, "t_ref", where + ".frame"));
    if (p.frame.x_offset.size() != dim || p.frame.v_offset.size() != dim)
      throw ConfigError({where + ".frame: offsets must have " + std::to_string(dim) + " entries"});
    const Json& f = field(pj, "force", where);
    const std::string type = field(f, "type", where + ".force").get<std::string>();
    if (type == "slice") {
      SliceForce s{field(f, "axis", where).get<std::size_t>(),
                   to_double(field(f, "vbar0", where)),
                   to_double(field(f, "alpha0", where)),
                   to_double(field(f, "beta0", where)),
                   to_double(field(f, "eps0", where)),
                   to_double(field(f, "x_left", where)),
                   to_double(field(f, "x_right", where))};
      if (s.axis >= dim) throw ConfigError({where + ".force.axis out of range"});
      p.force = s;
    } else if (type == "band") {
      if (dim != 1) throw ConfigError({where + ": band force requires dimension 1"});
      p.force = BandForce{to_double(field(f, "Y0", where)), to_double(field(f, "W0", where)),
                          to_double(field(f, "eps0", where))};
    } else {
      throw ConfigError({where + ".force.type: unknown force \"" + type + "\""});
    }
    try {
      plan.append(std::move(p));
    } catch (const DomainError& e) {
      throw ConfigError({where + ": " + e.what()});
    }
  }
  return plan;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace flock::io
