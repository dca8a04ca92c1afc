#pragma once

// Minimal decay rate at a prescribed frequency alpha: the smallest beta > 0
// such that W(alpha - i beta, theta) = 0 for some theta. The optimal cavity
// is the one induced by the switching solution at that zero.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qnm/cavity.hpp"
#include "qnm/nonlinear_mode.hpp"
#include "qnm/types.hpp"

namespace qnm {

struct OptimizerOptions {
  /// Upper end of the beta scan; <= 0 selects twice the decay rate of the
  /// best homogeneous admissible cavity at the nearest reachable frequency.
  double beta_max = 0.0;
  int n_theta = 96;
  int n_beta = 64;
  double tol_w = 1e-11;
  int max_newton = 60;
  double fd_step = 1e-6;
  double dedup_radius = 1e-6;
  double verify_tol = 1e-8;
  SwitchingOptions switching;
};

struct WZero {
  double theta = 0.0;
  double beta = 0.0;
  double residual = 0.0;  ///< |W|
};

struct OptimalDesign {
  double alpha = 0.0;
  double beta_min = 0.0;
  double theta_star = 0.0;
  Cavity cavity;
  NonlinearMode mode;
  double linear_residual = 0.0;  ///< |F(alpha - i beta_min; cavity)|
  std::vector<WZero> all_roots;  ///< sorted by beta, then theta
  double beta_max = 0.0;         ///< scan range actually used

  Complex omega() const { return {alpha, -beta_min}; }
};

/// No zero of W in the scanned box.
class NoZeroFound : public Error {
 public:
  NoZeroFound(const std::string& what, double min_abs_w, std::optional<double> frequency_bound)
      : Error(what), min_abs_w_(min_abs_w), frequency_bound_(frequency_bound) {}

  double min_abs_w() const { return min_abs_w_; }
  /// Admissible-frequency bound when alpha fell below it.
  std::optional<double> frequency_bound() const { return frequency_bound_; }

 private:
  double min_abs_w_;
  std::optional<double> frequency_bound_;
};

/// Best constant-permittivity design whose resonance frequency is as close
/// to alpha as the bounds allow.
struct HomogeneousReference {
  double eps = 0.0;
  int n = 0;
  Complex omega;  ///< resonance with Re closest to alpha
  double frequency_gap = 0.0;  ///< |Re omega - alpha|
  double beta = 0.0;
};

/// Exact when alpha is reachable: eps = (pi c m / (l alpha))^2 with m = n or
/// n + 1/2. Otherwise the closest band edge.
HomogeneousReference best_homogeneous(double alpha, const DesignSpace& space);

/// Newton on (Re W, Im W) in (theta, beta) from a seed; nullopt if it does
/// not converge to |W| < tol_w with beta > 0.
std::optional<WZero> polish_w_zero(double alpha, double theta, double beta, const DesignSpace& space,
                                   const OptimizerOptions& options);

struct WZeroScan {
  std::vector<WZero> zeros;  ///< sorted by beta, then theta
  double min_abs_w = 0.0;    ///< smallest |W| on the scan grid
  double beta_max = 0.0;
};

/// All zeros of W(alpha - i beta, theta) resolvable on the grid in
/// (-pi, pi] x (0, beta_max], polished and deduplicated.
WZeroScan find_w_zeros(double alpha, const DesignSpace& space, const OptimizerOptions& options);

/// Scan range used when OptimizerOptions::beta_max <= 0.
double default_beta_max(double alpha, const DesignSpace& space);

/// alpha > 0 solves directly; alpha < 0 maps through the mirror symmetry
/// omega -> -conj(omega), theta -> pi/2 - theta. alpha = 0 is rejected.
OptimalDesign optimize(double alpha, const DesignSpace& space, const OptimizerOptions& options = {});

struct VerifyOptions {
  int n_directions = 100;
  std::uint64_t seed = 20240611;
  double residual_tol = 1e-8;
  /// Largest tolerated first-order decrease of beta along Re omega = alpha.
  double descent_tol = 1e-8;
  /// Relative bound below which int psi^2 h counts as zero and the
  /// direction is skipped.
  double min_response = 1e-12;
};

struct VerificationReport {
  double linear_residual = 0.0;
  bool residual_ok = false;
  bool bang_bang = false;
  bool admissible = false;
  bool probe_ran = false;
  bool locally_optimal = false;
  int directions_used = 0;
  /// Largest first-order gain in Im omega among nonnegative combinations of
  /// unit probe shifts that keep Re omega fixed (positive means beta
  /// decreases). -2 when no such combination exists.
  double worst_descent = -2.0;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
};

/// Residual, bang-bang and a randomised first-order local-optimality probe.
VerificationReport verify_design(const Cavity& cavity, Complex omega, const VerifyOptions& options = {});
VerificationReport verify_design(const OptimalDesign& design, const VerifyOptions& options = {});

/// Random admissible direction: values within [eps_lo - eps, eps_hi - eps]
/// on each piece (so nonnegative on eps_lo layers and nonpositive on eps_hi
/// layers), zero on roughly half of a random refinement of the layers.
StepFunction random_admissible_direction(const Cavity& cavity, std::mt19937_64& rng);

}  // namespace qnm
