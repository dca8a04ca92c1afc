#pragma once

// Piecewise-constant open cavities on [0, l]: a perfect conductor at s = 0,
// a homogeneous exterior of permittivity eps_outer for s > l.

#include <cstddef>
#include <vector>

#include "qnm/types.hpp"

namespace qnm {

struct Layer {
  double thickness = 0.0;
  double eps = 1.0;
};

/// Permittivity range and geometry shared by every cavity of a design problem.
struct DesignSpace {
  double eps_lo = 1.0;
  double eps_hi = 1.0;
  double eps_outer = 1.0;
  double length = 1.0;
  double c = 1.0;

  /// Throws StructuralError unless 1 <= eps_lo <= eps_hi, eps_outer >= 1,
  /// length > 0 and c > 0.
  void validate() const;
};

/// Immutable piecewise-constant permittivity profile.
class Cavity {
 public:
  Cavity(std::vector<Layer> layers, double eps_outer, double eps_lo, double eps_hi, double c = 1.0);
  Cavity(std::vector<Layer> layers, const DesignSpace& space);

  static Cavity homogeneous(double eps, const DesignSpace& space);

  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t size() const { return layers_.size(); }
  double length() const { return length_; }
  double eps_outer() const { return eps_outer_; }
  double eps_lo() const { return eps_lo_; }
  double eps_hi() const { return eps_hi_; }
  double c() const { return c_; }
  DesignSpace space() const;

  /// Layer boundaries 0 = x_0 < x_1 < ... < x_n = l.
  std::vector<double> interfaces() const;

  /// Right-continuous permittivity; eps(l) is the last layer's value.
  double eps_at(double s) const;

  Cavity with_layers(std::vector<Layer> layers) const;

  /// Adjacent layers with identical permittivity fused into one.
  Cavity merged() const;

 private:
  std::vector<Layer> layers_;
  double eps_outer_;
  double eps_lo_;
  double eps_hi_;
  double c_;
  double length_ = 0.0;
};

struct AdmissibilityViolation {
  std::size_t layer = 0;
  double eps = 0.0;
};

struct AdmissibilityReport {
  bool admissible = true;
  std::vector<AdmissibilityViolation> violations;
};

/// Checks eps_lo <= eps <= eps_hi on every layer (boundary values allowed).
AdmissibilityReport validate_admissible(const Cavity& cavity);

/// Frequency above which every |alpha| is realised by some homogeneous
/// admissible cavity. Only valid for eps_outer <= eps_lo < eps_hi; throws
/// BoundNotApplicable otherwise.
double admissible_frequency_bound(const DesignSpace& space);
double admissible_frequency_bound(const Cavity& cavity);

/// Resonances omega_n, n in [n_first, n_last], of the homogeneous cavity of
/// permittivity eps. Half-integer offset is used when eps > eps_outer.
/// Throws NoEigenvalues when eps == eps_outer.
std::vector<Complex> homogeneous_eigenvalues(double eps, const DesignSpace& space, int n_first, int n_last);

/// Decay rate shared by every homogeneous resonance of permittivity eps.
double homogeneous_decay_rate(double eps, const DesignSpace& space);

/// Real scalar function on [0, l] that is constant on consecutive pieces.
struct Step {
  double length = 0.0;
  double value = 0.0;
};

class StepFunction {
 public:
  StepFunction() = default;
  explicit StepFunction(std::vector<Step> steps);

  static StepFunction constant(double length, double value);
  /// value on (a, b), zero elsewhere in [0, length].
  static StepFunction indicator(double length, double a, double b, double value = 1.0);

  const std::vector<Step>& steps() const { return steps_; }
  double length() const { return length_; }
  double value_at(double s) const;
  std::vector<double> breakpoints() const;

 private:
  std::vector<Step> steps_;
  double length_ = 0.0;
};

/// Merged, sorted breakpoints of two partitions of the same interval.
std::vector<double> common_refinement(const std::vector<double>& a, const std::vector<double>& b);

/// Cavity with permittivity eps + zeta * h on the common refinement.
Cavity perturbed(const Cavity& cavity, const StepFunction& h, double zeta);

}  // namespace qnm
