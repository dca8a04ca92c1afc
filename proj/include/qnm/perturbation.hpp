#pragma once

// First-order motion of a simple resonance under eps -> eps + zeta h, and the
// criterion that tells simple resonances from multiple ones.

#include <optional>

#include "qnm/cavity.hpp"
#include "qnm/linear_solver.hpp"
#include "qnm/resonance_finder.hpp"
#include "qnm/types.hpp"

namespace qnm {

struct PerturbationDirection {
  StepFunction h;
  /// Largest zeta >= 0 keeping eps + zeta h inside [eps_lo, eps_hi], when
  /// the direction was built for a specific cavity.
  std::optional<double> max_feasible_step;
};

/// Largest zeta >= 0 with eps_lo <= eps + zeta h <= eps_hi everywhere.
/// Zero when the cavity already sits on a bound that h pushes through.
double max_feasible_step(const Cavity& cavity, const StepFunction& h);

PerturbationDirection admissible_direction(const Cavity& cavity, StepFunction h);

/// int psi^2 eps ds + i c sqrt(eps_outer) / (2 omega) psi(l)^2.
/// Throws PreconditionError unless omega is an eigenvalue.
Complex degeneracy_functional(const Cavity& cavity, Complex omega, double residual_tol = kEigenResidualTol);

/// |functional| < rel_threshold * int |psi|^2 eps ds.
bool is_degenerate(const Cavity& cavity, Complex omega, double rel_threshold = 1e-8,
                   double residual_tol = kEigenResidualTol);

/// dOmega/dzeta at zeta = 0:
///   -omega int psi^2 h / (2 int psi^2 eps + i (c sqrt(eps_outer)/omega) psi(l)^2).
/// Throws DegenerateEigenvalue when is_degenerate holds.
Complex first_order_shift(const Cavity& cavity, Complex omega, const StepFunction& h);
Complex first_order_shift(const Cavity& cavity, const Resonance& omega, const PerturbationDirection& h);

/// C_1(omega, eps, m) = -m! omega^2 / (c^2 psi(l) d^m F/dz^m) for m = 1,
/// with dF/dz taken from the differentiated transfer matrices.
Complex splitting_constant_m1(const Cavity& cavity, Complex omega);

/// The m = 1 root formula (zeta C_1 int psi^2 h)^(1/m) divided by zeta; an
/// independent route to first_order_shift.
Complex first_order_shift_via_splitting(const Cavity& cavity, Complex omega, const StepFunction& h);

/// Prediction against a re-solved eigenvalue of eps + zeta h.
struct ShiftComparison {
  Complex predicted;     ///< zeta * first_order_shift
  Complex resolved;      ///< Omega(zeta) - omega from Newton on the perturbed cavity
  double remainder = 0;  ///< |Omega(zeta) - omega - zeta shift|
  double remainder_ratio = 0;  ///< remainder / zeta^2
  Resonance perturbed_root;
};

ShiftComparison compare_with_resolve(const Cavity& cavity, Complex omega, const StepFunction& h, double zeta,
                                     const PolishOptions& options = {1e-12, 60});

}  // namespace qnm
