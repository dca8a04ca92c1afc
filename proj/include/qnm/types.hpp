#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace qnm {

using Complex = std::complex<double>;

inline constexpr Complex kI{0.0, 1.0};

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: empty layer list, non-positive thickness, bad bounds.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside the domain where its formula holds.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The closed-form admissible-frequency bound does not apply to these bounds.
class BoundNotApplicable : public Error {
 public:
  using Error::Error;
};

/// A homogeneous cavity matched to its exterior has no resonances.
class NoEigenvalues : public Error {
 public:
  using Error::Error;
};

/// The first-order shift formula is invalid at a multiple eigenvalue.
class DegenerateEigenvalue : public Error {
 public:
  using Error::Error;
};

/// Iterative solve that did not converge or left its admissible region.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// The switching integrator exceeded its configured switch budget.
class RunawaySwitching : public Error {
 public:
  using Error::Error;
};

}  // namespace qnm
