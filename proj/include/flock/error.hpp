#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace flock {

/// Invalid argument or a violated precondition on numeric input.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The velocity support on the requested axis already has zero width.
class AlreadyFlocked : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Atoms or clustering prevent a positive control margin (ε⁰ or β⁰).
class DegenerateMeasure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite state during time integration; keeps the last finite state.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double t, std::vector<double> x, std::vector<double> v)
      : std::runtime_error(what), t_(t), x_(std::move(x)), v_(std::move(v)) {}
  double time() const noexcept { return t_; }
  const std::vector<double>& last_x() const noexcept { return x_; }
  const std::vector<double>& last_v() const noexcept { return v_; }

 private:
  double t_;
  std::vector<double> x_, v_;
};

/// Aggregated configuration problems, one human-readable line each.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> issues)
      : std::runtime_error(join(issues)), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid configuration:";
    for (const auto& s : v) out += "\n  " + s;
    return out;
  }
  std::vector<std::string> issues_;
};

}  // namespace flock
