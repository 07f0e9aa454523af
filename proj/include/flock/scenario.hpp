#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flock/dynamics.hpp"
#include "flock/ensemble.hpp"
#include "flock/io.hpp"
#include "flock/kernel.hpp"

namespace flock {

enum class Mode { None, Mass, Volume };

std::string mode_name(Mode m);

struct InitialSpec {
  enum Kind { UniformBox, Grid, Particles } kind = UniformBox;
  std::vector<double> x_lo, x_hi, v_lo, v_hi;  // UniformBox and Grid
  std::uint64_t seed = 0;                      // UniformBox
  std::size_t nodes = 0;                       // Grid, nodes per coordinate
  std::vector<double> x, v, w;                 // Particles, row-major; w empty means uniform
};

struct Scenario {
  std::size_t dim = 1;
  Kernel kernel = Kernel::power_law(1.0, 1.0);
  InitialSpec initial;
  std::size_t particles = 200;
  Mode mode = Mode::None;
  double c = 0.0;
  std::optional<double> eta;
  double dt_max = 0.01;
  double post_horizon = 10.0;
  double safety = 0.99;
  std::size_t max_steps = 100000;
  std::size_t steps_per_step = 20;
  std::size_t sample_stride = 1;
  std::string out_dir = "out";
};

/// Parses and validates a JSON config. Unknown keys, type and range problems are
/// collected and thrown together as a ConfigError.
Scenario validate_config(const std::string& text);
Scenario validate_config(const char* text);
Scenario validate_config(const io::Json& j);

Ensemble build_ensemble(const Scenario& s);

struct RunArtifacts {
  std::string trajectory_csv;
  std::string summary_json;
  std::string plan_json;
  bool success = false;               // box test with safety and positive decay
  std::optional<std::string> failure;  // strategy error message, artifacts are partial
};

/// Strategy for the selected mode, then free flight over post_horizon.
RunArtifacts run_scenario(const Scenario& s);

/// Integrates an exported plan against the scenario's initial ensemble, then free flight.
Trajectory replay_plan(const std::string& plan_json, const Scenario& s);
RunArtifacts replay_scenario(const std::string& plan_json, const Scenario& s);

/// Writes trajectory.csv, summary.json and plan.json into dir, creating it.
void write_artifacts(const RunArtifacts& a, const std::string& dir);

}  // namespace flock
