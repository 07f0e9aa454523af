#pragma once

#include <string>
#include <variant>
#include <vector>

namespace flock {

struct PowerLaw {
  double K;
  double gamma;
};

struct Exponential {
  double K;
  double lambda;
};

/// Samples (r_k, φ_k) with r_0 = 0; linear in between, constant past the last node.
struct Tabulated {
  std::vector<double> r;
  std::vector<double> phi;
};

/// Positive nonincreasing influence function φ(r), r ≥ 0.
class Kernel {
 public:
  using Family = std::variant<PowerLaw, Exponential, Tabulated>;

  static Kernel power_law(double K, double gamma);
  static Kernel exponential(double K, double lambda);
  static Kernel tabulated(std::vector<double> r, std::vector<double> phi);

  /// φ(r). Throws DomainError for r < 0 or NaN.
  double operator()(double r) const;

  const Family& family() const noexcept { return family_; }
  std::string name() const;

  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit(std::forward<F>(f), family_);
  }

 private:
  explicit Kernel(Family f) : family_(std::move(f)) {}
  Family family_;
};

double tabulated_eval(const Tabulated& t, double r);

struct TailIntegral {
  double value;     // +inf when divergent
  bool divergent;
};

/// ∫_a^∞ φ(2x) dx.
TailIntegral tail_integral(const Kernel& k, double a);

/// ∫_a^b φ(2x) dx for 0 ≤ a ≤ b < ∞.
double segment_integral(const Kernel& k, double a, double b);

struct InwardRadii {
  double r_plus;
  double r_minus;
};

/// Velocity offsets past which the uncontrolled field points back toward v̄ on one axis.
/// X bounds half the pairwise spatial distance; the support slab is [a, a + W].
InwardRadii inward_radii(const Kernel& k, double X, double a, double W, double vbar);

}  // namespace flock
