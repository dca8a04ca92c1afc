#pragma once

// Resonances of a fixed cavity: local minima of |F| on a grid over a window
// of the lower half-plane seed Newton's method on F.

#include <string>
#include <vector>

#include "qnm/cavity.hpp"
#include "qnm/types.hpp"

namespace qnm {

struct Resonance {
  Complex omega;
  double residual = 0.0;  ///< |F(omega)|
  /// int psi^2 eps ds + i c sqrt(eps_outer) / (2 omega) psi(l)^2; vanishes
  /// exactly at multiple eigenvalues.
  Complex degeneracy_indicator;
  int newton_iters = 0;

  double decay_rate() const { return -omega.imag(); }
};

struct SearchWindow {
  double re_min = 0.0;
  double re_max = 1.0;
  double im_min = -1.0;
  double im_max = 0.0;
  int nx = 200;
  int ny = 60;
  double tol_residual = 1e-10;
  int max_newton = 50;

  /// Throws StructuralError for empty ranges, grids below 2x2, tol <= 0, or
  /// a window reaching into Im > 0.
  void validate() const;
  double diagonal() const;
  bool contains(Complex z) const;
};

struct PolishOptions {
  double tol_residual = 1e-10;
  int max_newton = 50;
};

/// Newton iteration z <- z - F/F'. Falls back to direct minimisation of |F|
/// when F' is numerically zero. Throws ConvergenceError when the iterate
/// leaves the lower half-plane or the budget runs out.
Resonance polish(const Cavity& cavity, Complex seed, const PolishOptions& options = {});

/// Grid seed whose Newton run failed.
struct UnresolvedCell {
  Complex seed;
  std::string reason;
};

struct ResonanceSearch {
  std::vector<Resonance> roots;  ///< sorted by Re omega, then Im omega
  std::vector<UnresolvedCell> unresolved;
};

ResonanceSearch find_resonances(const Cavity& cavity, const SearchWindow& window);

}  // namespace qnm
