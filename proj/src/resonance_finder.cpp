#include "qnm/resonance_finder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <variant>

#include "qnm/linear_solver.hpp"
#include "qnm/parallel.hpp"
#include "qnm/perturbation.hpp"

namespace qnm {

namespace {

constexpr double kFlatDerivative = 1e-14;
constexpr double kEscapeRadius = 1e8;
// A small |F| alone can be cancellation noise (matched cavities, deep in the
// lower half-plane); the Newton correction must be small as well.
constexpr double kStepTol = 1e-8;
constexpr double kRoundoffFloor = 1e-13;

bool settled(const Cavity& cavity, const CharacteristicValue& v, Complex z, double tol) {
  if (!(std::abs(v.f) < tol)) return false;
  const double scale = std::abs(z) * std::sqrt(cavity.eps_outer()) / cavity.c() * std::abs(v.psi_end.value) +
                       std::abs(v.psi_end.slope);
  if (!(kRoundoffFloor * scale < tol)) return false;
  return std::abs(v.f) <= kStepTol * (1.0 + std::abs(z)) * std::abs(v.df);
}
constexpr double kMergeFraction = 1e-6;

void fail(const std::string& what) { throw ConvergenceError(what); }

// Compass search on |F| for roots where F' is numerically zero.
Resonance minimise_modulus(const Cavity& cavity, Complex z, int iters_so_far, const PolishOptions& options) {
  double value = std::abs(char_fn(cavity, z));
  double radius = 1e-3 * (1.0 + std::abs(z));
  const Complex moves[] = {{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}};
  int evaluations = 0;
  while (radius > 1e-16 * (1.0 + std::abs(z)) && evaluations < 4000) {
    bool improved = false;
    for (const Complex& dir : moves) {
      const Complex trial = z + radius * dir;
      const double v = std::abs(char_fn(cavity, trial));
      ++evaluations;
      if (v < value) {
        z = trial;
        value = v;
        improved = true;
        break;
      }
    }
    if (!improved) radius *= 0.5;
  }
  if (!(value < options.tol_residual)) {
    std::ostringstream msg;
    msg << "modulus minimisation stalled at " << z << " with |F| = " << value;
    fail(msg.str());
  }
  if (!(z.imag() < 0.0)) fail("modulus minimisation left the lower half-plane");
  return {z, value, {}, iters_so_far};
}

// Newton steps past the tolerance, kept while |F| still drops; reaches
// roundoff within one or two steps.
void refine(const Cavity& cavity, Complex& z, CharacteristicValue& value, double& residual) {
  for (int k = 0; k < 3 && std::abs(value.df) > 0.0; ++k) {
    const Complex next = z - value.f / value.df;
    if (!(next.imag() < 0.0)) return;
    auto next_value = char_fn_with_derivative(cavity, next);
    const double next_residual = std::abs(next_value.f);
    if (!(next_residual < residual)) return;
    z = next;
    value = next_value;
    residual = next_residual;
  }
}

}  // namespace

void SearchWindow::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw StructuralError(what);
  };
  require(std::isfinite(re_min) && std::isfinite(re_max) && re_min < re_max, "window needs re_min < re_max");
  require(std::isfinite(im_min) && std::isfinite(im_max) && im_min < im_max, "window needs im_min < im_max");
  require(im_max <= 0.0, "window must lie in the lower half-plane (im_max <= 0)");
  require(nx >= 2 && ny >= 2, "grid needs at least 2 x 2 nodes");
  require(tol_residual > 0.0, "tol_residual must be positive");
  require(max_newton > 0, "max_newton must be positive");
}

double SearchWindow::diagonal() const { return std::hypot(re_max - re_min, im_max - im_min); }

bool SearchWindow::contains(Complex z) const {
  const double slack = 1e-12 * diagonal();
  return z.real() >= re_min - slack && z.real() <= re_max + slack && z.imag() >= im_min - slack &&
         z.imag() <= im_max && z.imag() < 0.0;
}

Resonance polish(const Cavity& cavity, Complex seed, const PolishOptions& options) {
  Complex z = seed;
  auto value = char_fn_with_derivative(cavity, z);
  double residual = std::abs(value.f);
  int iters = 0;
  if (settled(cavity, value, z, options.tol_residual)) {
    if (!(z.imag() < 0.0)) fail("seed is not in the lower half-plane");
    refine(cavity, z, value, residual);
    return {z, residual, {}, 0};
  }
  bool converged = false;
  while (iters < options.max_newton) {
    if (std::abs(value.df) < kFlatDerivative * (1.0 + residual)) {
      return minimise_modulus(cavity, z, iters, options);
    }
    Complex step = value.f / value.df;
    Complex next = z - step;
    auto next_value = char_fn_with_derivative(cavity, next);
    // Halve the step while it increases |F|; the full step is used near a root.
    for (int halving = 0; halving < 30 && !(std::abs(next_value.f) < residual); ++halving) {
      step *= 0.5;
      next = z - step;
      next_value = char_fn_with_derivative(cavity, next);
    }
    ++iters;
    z = next;
    value = next_value;
    residual = std::abs(value.f);
    if (!(z.imag() < 0.0)) fail("Newton iterate left the lower half-plane");
    if (!std::isfinite(residual) || std::abs(z) > kEscapeRadius) fail("Newton iteration diverged");
    if (settled(cavity, value, z, options.tol_residual)) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "Newton did not converge from seed " << seed << " within " << options.max_newton
        << " steps (|F| = " << residual << ")";
    fail(msg.str());
  }
  refine(cavity, z, value, residual);
  return {z, residual, {}, iters};
}

ResonanceSearch find_resonances(const Cavity& cavity, const SearchWindow& window) {
  window.validate();
  const int nx = window.nx;
  const int ny = window.ny;
  const double dx = (window.re_max - window.re_min) / (nx - 1);
  const double dy = (window.im_max - window.im_min) / (ny - 1);
  // One ring of padding so that minima on the window edge are tested
  // against their outside neighbours.
  const int px = nx + 2;
  const int py = ny + 2;
  auto node = [&](int i, int j) { return Complex(window.re_min + (i - 1) * dx, window.im_min + (j - 1) * dy); };
  std::vector<double> modulus(static_cast<std::size_t>(px) * py);
  parallel_for(modulus.size(), [&](std::size_t idx) {
    const int i = static_cast<int>(idx % px);
    const int j = static_cast<int>(idx / px);
    const double v = std::abs(char_fn(cavity, node(i, j)));
    modulus[idx] = std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  });
  auto at = [&](int i, int j) { return modulus[static_cast<std::size_t>(j) * px + i]; };

  std::vector<Complex> seeds;
  for (int j = 1; j <= ny; ++j) {
    for (int i = 1; i <= nx; ++i) {
      const double v = at(i, j);
      if (!std::isfinite(v)) continue;
      bool minimum = true;
      for (int dj = -1; dj <= 1 && minimum; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          if ((di != 0 || dj != 0) && at(i + di, j + dj) < v) {
            minimum = false;
            break;
          }
        }
      }
      if (minimum) seeds.push_back(node(i, j));
    }
  }

  const PolishOptions options{window.tol_residual, window.max_newton};
  std::vector<std::variant<Resonance, UnresolvedCell>> outcomes(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t k) {
    try {
      outcomes[k] = polish(cavity, seeds[k], options);
    } catch (const ConvergenceError& e) {
      outcomes[k] = UnresolvedCell{seeds[k], e.what()};
    }
  });

  ResonanceSearch result;
  std::vector<Resonance> found;
  for (auto& outcome : outcomes) {
    if (auto* r = std::get_if<Resonance>(&outcome)) {
      if (window.contains(r->omega)) found.push_back(*r);
    } else {
      result.unresolved.push_back(std::get<UnresolvedCell>(outcome));
    }
  }
  std::sort(found.begin(), found.end(), [](const Resonance& a, const Resonance& b) {
    return a.omega.real() != b.omega.real() ? a.omega.real() < b.omega.real() : a.omega.imag() < b.omega.imag();
  });
  const double radius = kMergeFraction * window.diagonal();
  for (const auto& r : found) {
    auto dup = std::find_if(result.roots.begin(), result.roots.end(),
                            [&](const Resonance& kept) { return std::abs(kept.omega - r.omega) < radius; });
    if (dup == result.roots.end()) {
      result.roots.push_back(r);
    } else if (r.residual < dup->residual) {
      *dup = r;
    }
  }
  for (auto& r : result.roots) r.degeneracy_indicator = degeneracy_functional(cavity, r.omega);
  return result;
}

}  // namespace qnm
