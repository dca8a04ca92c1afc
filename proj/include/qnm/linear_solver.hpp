#pragma once

// Exact transfer-matrix propagation of E'' = -z^2 (eps/c^2) E through a
// piecewise-constant cavity, the characteristic function
//   F(z) = i z (sqrt(eps_outer)/c) psi(l) - psi'(l)
// and its analytic derivatives in z and in the permittivity.

#include <string>
#include <vector>

#include "qnm/cavity.hpp"
#include "qnm/types.hpp"

namespace qnm {

/// (E, E') at a point.
struct FieldState {
  Complex value{0.0, 0.0};
  Complex slope{0.0, 0.0};
};

/// Maps (E, E') at s to (E, E') at s + dt for constant k^2:
///   [[cos k dt, sin(k dt)/k], [-k sin k dt, cos k dt]].
/// Entries depend on k^2 only, so the branch of k never matters.
struct TransferMatrix {
  Complex a, b, c, d;

  FieldState apply(const FieldState& in) const {
    return {a * in.value + b * in.slope, c * in.value + d * in.slope};
  }
};

TransferMatrix layer_transfer(Complex k2, double dt);

/// Entrywise derivative of layer_transfer with respect to k^2.
TransferMatrix layer_transfer_dk2(Complex k2, double dt);

inline Complex wave_number_squared(Complex z, double eps, double c) { return z * z * (eps / (c * c)); }

/// i z (sqrt(eps_outer)/c) E(l) - E'(l); zero exactly when E meets the
/// outgoing-wave condition at s = l.
Complex radiation_mismatch(Complex z, const FieldState& end, double eps_outer, double c);

/// Fundamental solutions at s: psi(0)=0, psi'(0)=1 and phi(0)=1, phi'(0)=0.
struct FundamentalPair {
  double s = 0.0;
  Complex psi, dpsi, phi, dphi;

  Complex wronskian() const { return phi * dpsi - dphi * psi; }
};

FundamentalPair propagate(const Cavity& cavity, Complex z);

struct TraceSample {
  double s = 0.0;
  Complex e, de;
};

/// Stretch of constant permittivity together with the field at its start.
struct TraceSegment {
  double begin = 0.0;
  double end = 0.0;
  double eps = 1.0;
  FieldState start;
};

/// Sampled solution on [0, l]. Segments keep the exact in-layer closed
/// form, so the trace can be re-evaluated at any s.
class ModeTrace {
 public:
  ModeTrace(Complex z, double c, std::vector<TraceSegment> segments, std::vector<double> switch_points,
            int samples_per_segment = 64);

  Complex z() const { return z_; }
  double c() const { return c_; }
  double length() const { return segments_.back().end; }
  const std::vector<TraceSegment>& segments() const { return segments_; }
  const std::vector<TraceSample>& samples() const { return samples_; }
  const std::vector<double>& switch_points() const { return switch_points_; }

  FieldState at(double s) const;

  /// Columns s, re_e, im_e, re_de, im_de.
  std::string to_csv() const;

 private:
  Complex z_;
  double c_;
  std::vector<TraceSegment> segments_;
  std::vector<double> switch_points_;
  std::vector<TraceSample> samples_;
};

/// Solution with E(0) = 0, E'(0) = initial_slope through the cavity.
ModeTrace trace_mode(const Cavity& cavity, Complex z, Complex initial_slope = 1.0, int samples_per_layer = 64);

Complex char_fn(const Cavity& cavity, Complex z);

struct CharacteristicValue {
  Complex f;
  Complex df;
  FieldState psi_end;
};

/// F and dF/dz in one sweep (differentiated transfer matrices).
CharacteristicValue char_fn_with_derivative(const Cavity& cavity, Complex z);

Complex char_fn_dz(const Cavity& cavity, Complex z);

/// Integral of psi^2 eps over [0, l].
Complex psi_squared_eps_integral(const Cavity& cavity, Complex z);

/// Integral of psi^2 h over [0, l] for a step-function weight h.
Complex psi_squared_weighted_integral(const Cavity& cavity, Complex z, const StepFunction& h);

/// Integral of |psi|^2 eps over [0, l]; scale for degeneracy thresholds.
double psi_abs_squared_eps_integral(const Cavity& cavity, Complex z);

/// Residual bound |F(omega)| below which omega counts as an eigenvalue for
/// the eigenvalue-only derivative formulas.
inline constexpr double kEigenResidualTol = 1e-7;

/// dF/dz at an eigenvalue from
///   2 omega / (c^2 psi(l)) int psi^2 eps ds + i sqrt(eps_outer)/c psi(l).
/// Throws PreconditionError when |F(omega)| > residual_tol.
Complex dz_at_eigenvalue(const Cavity& cavity, Complex omega, double residual_tol = kEigenResidualTol);

/// d/dzeta F(omega; eps + zeta h) at zeta = 0 for an eigenvalue omega:
///   omega^2 / (c^2 psi(l)) int psi^2 h ds.
Complex directional_derivative(const Cavity& cavity, Complex omega, const StepFunction& h,
                               double residual_tol = kEigenResidualTol);

/// psi(l, omega) after checking that omega is an eigenvalue.
Complex psi_end_at_eigenvalue(const Cavity& cavity, Complex omega, double residual_tol = kEigenResidualTol);

}  // namespace qnm
