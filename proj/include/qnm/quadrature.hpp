#pragma once

#include <functional>
#include <span>

#include "qnm/types.hpp"

namespace qnm {

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::span<const double> nodes;
  std::span<const double> weights;
};

/// Cached rule; n in [2, 64].
GaussRule gauss_legendre(int n);

/// Adaptive 16-point Gauss-Legendre with interval bisection until the
/// two-half estimate agrees with the whole to abs_tol.
Complex integrate_adaptive(const std::function<Complex(double)>& f, double a, double b, double abs_tol = 1e-12,
                           int max_depth = 40);

}  // namespace qnm
