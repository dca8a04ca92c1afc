#pragma once

// The switching equation
//   Psi'' = -(z^2/c^2) Psi [eps_lo + (eps_hi - eps_lo) chi(Psi^2)],
//   Psi(0) = 0, Psi'(0) = e^{i theta},
// where chi(w) = 1 for Im w > 0 and 0 otherwise. Between switch points the
// permittivity is constant and the solution is propagated exactly; switch
// points are the zeros of Im Psi^2.
//
// W(z, theta) = i z (sqrt(eps_outer)/c) Psi(l) - Psi'(l) vanishes exactly when
// z is a resonance of the cavity that Psi induces.

#include <optional>
#include <string>
#include <vector>

#include "qnm/cavity.hpp"
#include "qnm/linear_solver.hpp"
#include "qnm/types.hpp"

namespace qnm {

struct SwitchingOptions {
  int max_switches = 10000;
  /// Chebyshev sample count per propagation step for sign-change detection.
  int chebyshev_points = 16;
  int samples_per_layer = 64;
};

struct NonlinearMode {
  Complex z;
  double theta = 0.0;
  ModeTrace trace;         ///< switch_points populated
  Cavity induced_cavity;   ///< layers alternate between eps_lo and eps_hi
  Complex w_value;
  /// Im z^2 < 0: switch points are isolated and Psi has no zero in (0, l].
  bool lemma_hypothesis = true;
  /// First s > 0 where |Psi| was found to vanish (only when the hypothesis fails).
  std::optional<double> interior_zero;
};

/// Solution of the switching equation with Psi(0) = 0, Psi'(0) = initial_slope.
NonlinearMode integrate_switching(Complex z, Complex initial_slope, const DesignSpace& space,
                                  const SwitchingOptions& options = {});

/// integrate_switching with initial slope e^{i theta}.
NonlinearMode integrate_psi(Complex z, double theta, const DesignSpace& space, const SwitchingOptions& options = {});

/// W(z, theta) without assembling the trace.
Complex eval_W(Complex z, double theta, const DesignSpace& space, const SwitchingOptions& options = {});

/// Permittivity chosen on (0, epsilon) for a start slope: the sign of
/// Im(e^{2 i theta}) decides; when that vanishes the next Taylor term
/// -cos(2 theta) Im z^2 does; ties resolve to eps_lo.
bool starts_on_high(Complex z, Complex initial_slope);

struct MonotonicityReport {
  enum class Status { increasing, violated, skipped, interior_zero };
  Status status = Status::increasing;
  /// First interval where arg Psi^2 failed to increase, or where Psi vanished.
  double begin = 0.0;
  double end = 0.0;
  std::string diagnostic;

  bool passed() const { return status == Status::increasing; }
};

/// Checks that the continuous branch of arg E^2(s) is strictly increasing on
/// (0, l]. Samples are densified until consecutive phase jumps are below
/// pi/2, so undersampling never produces a false violation. Skipped when
/// Im z^2 >= 0.
MonotonicityReport arg_monotonicity_check(const ModeTrace& trace);

/// |W| on a (theta, beta) grid at Re z = alpha.
struct WSample {
  double theta = 0.0;
  double beta = 0.0;
  Complex w;
};

/// theta_i = -pi + 2 pi (i + 1) / n_theta, beta_j evenly spaced on
/// [beta_min, beta_max]; theta varies fastest.
std::vector<WSample> sample_W(double alpha, double beta_min, double beta_max, int n_theta, int n_beta,
                              const DesignSpace& space, const SwitchingOptions& options = {});

/// Wraps an angle into (-pi, pi].
double wrap_angle(double theta);

}  // namespace qnm
