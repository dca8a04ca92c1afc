#include "qnm/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qnm {

double max_feasible_step(const Cavity& cavity, const StepFunction& h) {
  auto knots = common_refinement(cavity.interfaces(), h.breakpoints());
  knots.back() = cavity.length();
  double step = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double mid = 0.5 * (knots[i] + knots[i + 1]);
    const double eps = cavity.eps_at(mid);
    const double v = h.value_at(mid);
    if (v > 0.0) step = std::min(step, (cavity.eps_hi() - eps) / v);
    if (v < 0.0) step = std::min(step, (eps - cavity.eps_lo()) / -v);
  }
  return std::max(step, 0.0);
}

PerturbationDirection admissible_direction(const Cavity& cavity, StepFunction h) {
  const double step = max_feasible_step(cavity, h);
  return {std::move(h), step};
}

Complex degeneracy_functional(const Cavity& cavity, Complex omega, double residual_tol) {
  const Complex psi_l = psi_end_at_eigenvalue(cavity, omega, residual_tol);
  return psi_squared_eps_integral(cavity, omega) +
         kI * (cavity.c() * std::sqrt(cavity.eps_outer()) / (2.0 * omega)) * psi_l * psi_l;
}

bool is_degenerate(const Cavity& cavity, Complex omega, double rel_threshold, double residual_tol) {
  const Complex d = degeneracy_functional(cavity, omega, residual_tol);
  return std::abs(d) < rel_threshold * psi_abs_squared_eps_integral(cavity, omega);
}

Complex first_order_shift(const Cavity& cavity, Complex omega, const StepFunction& h) {
  const Complex psi_l = psi_end_at_eigenvalue(cavity, omega);
  const Complex functional = psi_squared_eps_integral(cavity, omega) +
                             kI * (cavity.c() * std::sqrt(cavity.eps_outer()) / (2.0 * omega)) * psi_l * psi_l;
  if (std::abs(functional) < 1e-8 * psi_abs_squared_eps_integral(cavity, omega)) {
    std::ostringstream msg;
    msg << "omega = " << omega << " is degenerate (|functional| = " << std::abs(functional)
        << "); the first-order shift is undefined";
    throw DegenerateEigenvalue(msg.str());
  }
  // The denominator 2 int psi^2 eps + i (c sqrt(eps_outer)/omega) psi(l)^2 is twice the functional.
  return -omega * psi_squared_weighted_integral(cavity, omega, h) / (2.0 * functional);
}

Complex first_order_shift(const Cavity& cavity, const Resonance& omega, const PerturbationDirection& h) {
  return first_order_shift(cavity, omega.omega, h.h);
}

Complex splitting_constant_m1(const Cavity& cavity, Complex omega) {
  const Complex psi_l = psi_end_at_eigenvalue(cavity, omega);
  const Complex df = char_fn_dz(cavity, omega);
  const double c = cavity.c();
  return -omega * omega / (c * c * psi_l * df);
}

Complex first_order_shift_via_splitting(const Cavity& cavity, Complex omega, const StepFunction& h) {
  return splitting_constant_m1(cavity, omega) * psi_squared_weighted_integral(cavity, omega, h);
}

ShiftComparison compare_with_resolve(const Cavity& cavity, Complex omega, const StepFunction& h, double zeta,
                                     const PolishOptions& options) {
  const Complex shift = first_order_shift(cavity, omega, h);
  const Cavity moved = perturbed(cavity, h, zeta);
  const Resonance root = polish(moved, omega + zeta * shift, options);
  ShiftComparison out;
  out.predicted = zeta * shift;
  out.resolved = root.omega - omega;
  out.remainder = std::abs(out.resolved - out.predicted);
  out.remainder_ratio = out.remainder / (zeta * zeta);
  out.perturbed_root = root;
  return out;
}

}  // namespace qnm
