// flockctl: run one flocking scenario and write trajectory.csv, summary.json, plan.json.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "flock/error.hpp"
#include "flock/scenario.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitStrategy = 3;

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw flock::ConfigError({path + ": cannot open"});
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field flocking simulator with sparse control synthesis"};
  std::optional<std::string> config, mode, out, replay;
  std::optional<double> c, dt_max, post_horizon;
  std::optional<std::size_t> particles, dim;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config, "JSON scenario file");
  app.add_option("--mode", mode, "Constraint mode")->check(CLI::IsMember({"mass", "volume", "none"}));
  app.add_option("--c", c, "Control budget");
  app.add_option("--particles", particles, "Particle count");
  app.add_option("--seed", seed, "Sampler seed");
  app.add_option("--dim", dim, "Dimension");
  app.add_option("--out", out, "Output directory");
  app.add_option("--dt-max", dt_max, "Largest RK4 step");
  app.add_option("--post-horizon", post_horizon, "Free flight after the plan");
  app.add_option("--replay", replay, "Replay an exported plan.json instead of synthesizing one");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  flock::Scenario sc;
  try {
    nlohmann::ordered_json j;
    if (config) {
      const std::string text = slurp(*config);
      try {
        j = nlohmann::ordered_json::parse(text);
      } catch (const nlohmann::json::parse_error&) {
        flock::validate_config(text);  // rethrows with a line and column
      }
    } else {
      j = {{"schema_version", 1}, {"kernel", {{"family", "power_law"}, {"K", 1.0}, {"gamma", 1.0}}}};
    }
    if (!j.is_object()) throw flock::ConfigError({"config: expected a JSON object"});
    if (mode) j["mode"] = *mode;
    if (c) j["c"] = *c;
    if (particles) j["particles"] = *particles;
    if (dim) j["dim"] = *dim;
    if (out) j["out"] = *out;
    if (dt_max) j["dt_max"] = *dt_max;
    if (post_horizon) j["post_horizon"] = *post_horizon;
    if (seed) {
      if (!j.contains("initial")) j["initial"] = nlohmann::ordered_json::object();
      if (j["initial"].is_object()) j["initial"]["seed"] = *seed;
    }
    sc = flock::validate_config(j);
  } catch (const flock::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitValidation;
  }

  const auto t0 = std::chrono::steady_clock::now();
  flock::RunArtifacts art;
  try {
    art = replay ? flock::replay_scenario(slurp(*replay), sc) : flock::run_scenario(sc);
  } catch (const flock::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitStrategy;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  try {
    flock::write_artifacts(art, sc.out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitStrategy;
  }
  std::fprintf(stderr, "flockctl: %s, %.3f s, artifacts in %s\n",
               art.failure ? "strategy failed" : (art.success ? "flocking certified" : "not certified"),
               secs, sc.out_dir.c_str());
  if (art.failure) {
    std::cerr << *art.failure << '\n';
    return kExitStrategy;
  }
  if (sc.mode != flock::Mode::None && !replay && !art.success) return kExitStrategy;
  return 0;
}
