#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "flock/control.hpp"
#include "flock/dynamics.hpp"
#include "flock/flocking.hpp"
#include "flock/kernel.hpp"
#include "flock/strategy.hpp"

namespace flock::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Doubles print as %.17g; inf and nan print as inf, -inf, nan.
std::string format_double(double x);

/// Header line for a d-dimensional trajectory.
std::string csv_header(std::size_t dim);
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, std::size_t dim);
std::string trajectory_csv(const Trajectory& traj, std::size_t dim);

/// JSON-safe number: finite values as numbers, others as the strings "inf", "-inf", "nan".
Json number(double x);
double to_double(const Json& j);

Json to_json(const Kernel& k);
Json to_json(const FlockingVerdict& v);
Json to_json(const AxisExtent& a);
Json to_json(const StepRecord& r);
Json to_json(const StrategySummary& s);

/// Machine-readable schedule of a plan: piece times, frame, force parameters, ω boxes.
Json plan_to_json(const ControlPlan& plan, std::size_t dim);
/// Inverse of plan_to_json. Throws ConfigError on schema mismatch.
ControlPlan plan_from_json(const Json& j, std::size_t dim);

/// Pretty JSON text terminated by a newline.
std::string dump(const Json& j);

}  // namespace flock::io
