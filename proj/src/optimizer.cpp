#include "qnm/optimizer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qnm/linear_solver.hpp"
#include "qnm/parallel.hpp"
#include "qnm/perturbation.hpp"

namespace qnm {

namespace {

constexpr double kPi = std::numbers::pi;

double angle_gap(double a, double b) { return std::abs(wrap_angle(a - b)); }

bool same_zero(const WZero& a, const WZero& b, double radius) {
  return std::hypot(angle_gap(a.theta, b.theta), a.beta - b.beta) < radius;
}

void sort_zeros(std::vector<WZero>& zeros) {
  std::sort(zeros.begin(), zeros.end(), [](const WZero& a, const WZero& b) {
    return a.beta != b.beta ? a.beta < b.beta : a.theta < b.theta;
  });
}

}  // namespace

HomogeneousReference best_homogeneous(double alpha, const DesignSpace& space) {
  space.validate();
  const double target = std::abs(alpha);
  if (!(target > 0.0)) throw PreconditionError("frequency must be nonzero");
  const double unit = kPi * space.c / space.length;

  std::optional<HomogeneousReference> exact;
  std::optional<HomogeneousReference> nearest;
  auto offer_exact = [&](double eps, int n, double m) {
    if (eps < space.eps_lo || eps > space.eps_hi || eps == space.eps_outer) return;
    const double beta = homogeneous_decay_rate(eps, space);
    if (!exact || beta < exact->beta) exact = HomogeneousReference{eps, n, {unit * m / std::sqrt(eps), -beta}, 0.0, beta};
  };
  auto offer_edge = [&](double eps, int n, double m) {
    if (eps == space.eps_outer) return;
    const double re = unit * m / std::sqrt(eps);
    const double gap = std::abs(re - target);
    const double beta = homogeneous_decay_rate(eps, space);
    if (!nearest || gap < nearest->frequency_gap || (gap == nearest->frequency_gap && beta < nearest->beta)) {
      nearest = HomogeneousReference{eps, n, {re, -beta}, gap, beta};
    }
  };

  const int n_max = static_cast<int>(std::ceil(target * std::sqrt(space.eps_hi) / unit)) + 2;
  for (int n = 0; n <= n_max; ++n) {
    // eps > eps_outer: Re omega = unit (n + 1/2) / sqrt(eps).
    const double half = n + 0.5;
    offer_exact(std::pow(unit * half / target, 2), n, half);
    for (double eps : {space.eps_lo, space.eps_hi}) {
      if (eps > space.eps_outer) offer_edge(eps, n, half);
    }
    // eps < eps_outer: Re omega = unit n / sqrt(eps), n >= 1.
    if (n >= 1 && space.eps_lo < space.eps_outer) {
      const double eps_needed = std::pow(unit * n / target, 2);
      if (eps_needed < space.eps_outer) offer_exact(eps_needed, n, n);
      for (double eps : {space.eps_lo, std::min(space.eps_hi, space.eps_outer)}) {
        if (eps < space.eps_outer) offer_edge(eps, n, n);
      }
    }
  }
  if (exact) return *exact;
  if (nearest) return *nearest;
  throw NoEigenvalues("no homogeneous admissible cavity has resonances");
}

double default_beta_max(double alpha, const DesignSpace& space) {
  return 2.0 * best_homogeneous(alpha, space).beta;
}

std::optional<WZero> polish_w_zero(double alpha, double theta, double beta, const DesignSpace& space,
                                   const OptimizerOptions& options) {
  auto w_at = [&](double t, double b) { return eval_W(Complex(alpha, -b), t, space, options.switching); };
  Complex w = w_at(theta, beta);
  double residual = std::abs(w);
  const double h = options.fd_step;
  for (int iter = 0; iter < options.max_newton && !(residual < options.tol_w); ++iter) {
    const Complex w_theta = (w_at(theta + h, beta) - w_at(theta - h, beta)) / (2.0 * h);
    const Complex w_beta = beta > h ? (w_at(theta, beta + h) - w_at(theta, beta - h)) / (2.0 * h)
                                    : (w_at(theta, beta + h) - w) / h;
    Eigen::Matrix2d jac;
    jac << w_theta.real(), w_beta.real(), w_theta.imag(), w_beta.imag();
    const Eigen::Vector2d rhs(-w.real(), -w.imag());
    // Minimum-norm solve: the Jacobian is rank one when W factors as e^{i theta} F(z).
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(jac, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(1e-10);
    Eigen::Vector2d step = svd.solve(rhs);
    if (!step.allFinite()) return std::nullopt;
    const double cap = 0.25;
    if (step.norm() > cap) step *= cap / step.norm();

    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving) {
      const double t_new = theta + step(0);
      const double b_new = beta + step(1);
      if (b_new > 0.0) {
        const Complex w_new = w_at(t_new, b_new);
        if (std::abs(w_new) < residual) {
          theta = wrap_angle(t_new);
          beta = b_new;
          w = w_new;
          residual = std::abs(w_new);
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  if (!(residual < options.tol_w) || !(beta > 0.0)) return std::nullopt;
  return WZero{wrap_angle(theta), beta, residual};
}

WZeroScan find_w_zeros(double alpha, const DesignSpace& space, const OptimizerOptions& options) {
  space.validate();
  if (!(alpha > 0.0)) throw PreconditionError("W zeros are scanned for alpha > 0 only");
  if (options.n_theta < 3 || options.n_beta < 2) throw StructuralError("W grid needs n_theta >= 3, n_beta >= 2");
  WZeroScan scan;
  scan.beta_max = options.beta_max > 0.0 ? options.beta_max : default_beta_max(alpha, space);
  const int nt = options.n_theta;
  const int nb = options.n_beta;
  auto theta_of = [&](int i) { return -kPi + 2.0 * kPi * (i + 1) / nt; };
  auto beta_of = [&](int j) { return scan.beta_max * (j + 1) / nb; };

  std::vector<double> modulus(static_cast<std::size_t>(nt) * nb);
  parallel_for(modulus.size(), [&](std::size_t idx) {
    const int i = static_cast<int>(idx % nt);
    const int j = static_cast<int>(idx / nt);
    const double v = std::abs(eval_W(Complex(alpha, -beta_of(j)), theta_of(i), space, options.switching));
    modulus[idx] = std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  });
  auto at = [&](int i, int j) { return modulus[static_cast<std::size_t>(j) * nt + ((i % nt) + nt) % nt]; };
  scan.min_abs_w = *std::min_element(modulus.begin(), modulus.end());

  std::vector<std::pair<double, double>> seeds;
  for (int j = 0; j < nb; ++j) {
    for (int i = 0; i < nt; ++i) {
      const double v = at(i, j);
      if (!std::isfinite(v)) continue;
      bool minimum = true;
      for (int dj = -1; dj <= 1 && minimum; ++dj) {
        if (j + dj < 0 || j + dj >= nb) continue;
        for (int di = -1; di <= 1; ++di) {
          if ((di != 0 || dj != 0) && at(i + di, j + dj) < v) {
            minimum = false;
            break;
          }
        }
      }
      if (minimum) seeds.emplace_back(theta_of(i), beta_of(j));
    }
  }

  std::vector<std::optional<WZero>> polished(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t k) {
    polished[k] = polish_w_zero(alpha, seeds[k].first, seeds[k].second, space, options);
  });
  std::vector<WZero> found;
  for (const auto& z : polished) {
    if (z && z->beta > 0.0 && z->beta <= scan.beta_max * (1.0 + 1e-9)) found.push_back(*z);
  }
  sort_zeros(found);
  for (const auto& z : found) {
    auto dup = std::find_if(scan.zeros.begin(), scan.zeros.end(),
                            [&](const WZero& kept) { return same_zero(kept, z, options.dedup_radius); });
    if (dup == scan.zeros.end()) {
      scan.zeros.push_back(z);
    } else if (z.residual < dup->residual) {
      *dup = z;
    }
  }
  sort_zeros(scan.zeros);
  return scan;
}

namespace {

OptimalDesign optimize_positive(double alpha, const DesignSpace& space, const OptimizerOptions& options) {
  WZeroScan scan = find_w_zeros(alpha, space, options);
  if (scan.zeros.empty()) {
    std::optional<double> bound;
    std::ostringstream msg;
    msg << "no admissible QN eigenvalue located for alpha = " << alpha << " with beta in (0, " << scan.beta_max
        << "]; smallest |W| on the grid was " << scan.min_abs_w;
    try {
      const double b = admissible_frequency_bound(space);
      if (alpha < b) {
        bound = b;
        msg << "; alpha lies below the guaranteed-admissible frequency " << b;
      }
    } catch (const BoundNotApplicable&) {
    }
    throw NoZeroFound(msg.str(), scan.min_abs_w, bound);
  }
  const WZero& best = scan.zeros.front();
  const Complex omega(alpha, -best.beta);
  NonlinearMode mode = integrate_psi(omega, best.theta, space, options.switching);
  Cavity cavity = mode.induced_cavity;
  const double residual = std::abs(char_fn(cavity, omega));
  return {alpha, best.beta, best.theta, std::move(cavity), std::move(mode), residual, std::move(scan.zeros),
          scan.beta_max};
}

}  // namespace

OptimalDesign optimize(double alpha, const DesignSpace& space, const OptimizerOptions& options) {
  if (!std::isfinite(alpha) || alpha == 0.0) {
    throw PreconditionError("optimisation needs a nonzero finite frequency (Re omega = 0 is excluded)");
  }
  if (alpha > 0.0) return optimize_positive(alpha, space, options);

  // Psi(s; -conj z, pi/2 - theta) = i conj Psi(s; z, theta): same Im Psi^2,
  // same switch points, W -> i conj W.
  OptimalDesign mirror = optimize_positive(-alpha, space, options);
  const double theta = wrap_angle(kPi / 2.0 - mirror.theta_star);
  const Complex omega(alpha, -mirror.beta_min);
  NonlinearMode mode = integrate_psi(omega, theta, space, options.switching);
  Cavity cavity = mode.induced_cavity;
  const double residual = std::abs(char_fn(cavity, omega));
  std::vector<WZero> roots;
  for (const auto& r : mirror.all_roots) roots.push_back({wrap_angle(kPi / 2.0 - r.theta), r.beta, r.residual});
  sort_zeros(roots);
  return {alpha, mirror.beta_min, theta, std::move(cavity), std::move(mode), residual, std::move(roots),
          mirror.beta_max};
}

StepFunction random_admissible_direction(const Cavity& cavity, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> cuts;
  const int extra = 4 + static_cast<int>(unit(rng) * 8.0);
  for (int k = 0; k < extra; ++k) cuts.push_back(unit(rng) * cavity.length());
  std::sort(cuts.begin(), cuts.end());
  cuts.insert(cuts.begin(), 0.0);
  cuts.push_back(cavity.length());
  auto knots = common_refinement(cavity.interfaces(), cuts);
  knots.back() = cavity.length();

  std::vector<Step> steps;
  bool any = false;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double mid = 0.5 * (knots[i] + knots[i + 1]);
    const double eps = cavity.eps_at(mid);
    double value = 0.0;
    if (unit(rng) < 0.5) {
      const double up = cavity.eps_hi() - eps;
      const double down = eps - cavity.eps_lo();
      const double u = 2.0 * unit(rng) - 1.0;
      value = u >= 0.0 ? u * up : u * down;
    }
    any = any || value != 0.0;
    steps.push_back({knots[i + 1] - knots[i], value});
  }
  if (!any) {
    // Fall back to the full-range push on the first piece.
    const double eps = cavity.eps_at(0.5 * (knots[0] + knots[1]));
    steps.front().value = eps < cavity.eps_hi() ? cavity.eps_hi() - eps : cavity.eps_lo() - eps;
  }
  return StepFunction(std::move(steps));
}

VerificationReport verify_design(const Cavity& cavity, Complex omega, const VerifyOptions& options) {
  VerificationReport report;
  report.linear_residual = std::abs(char_fn(cavity, omega));
  report.residual_ok = report.linear_residual < options.residual_tol;
  if (!report.residual_ok) {
    std::ostringstream msg;
    msg << "linear residual |F(omega)| = " << report.linear_residual << " exceeds " << options.residual_tol;
    report.failures.push_back(msg.str());
  }

  const auto admissibility = validate_admissible(cavity);
  report.admissible = admissibility.admissible;
  if (!report.admissible) {
    std::ostringstream msg;
    msg << "cavity is not admissible: " << admissibility.violations.size() << " layer(s) outside [eps_lo, eps_hi]";
    report.failures.push_back(msg.str());
  }
  report.bang_bang = std::all_of(cavity.layers().begin(), cavity.layers().end(), [&](const Layer& layer) {
    return std::abs(layer.eps - cavity.eps_lo()) <= 1e-12 * cavity.eps_lo() ||
           std::abs(layer.eps - cavity.eps_hi()) <= 1e-12 * cavity.eps_hi();
  });
  if (!report.bang_bang) report.failures.push_back("cavity takes values strictly between eps_lo and eps_hi");

  if (!report.residual_ok) {
    report.failures.push_back("local-optimality probe skipped: omega is not an eigenvalue of the cavity");
    return report;
  }
  if (!(omega.imag() < 0.0)) report.failures.push_back("omega is not in the lower half-plane");

  Complex functional;
  try {
    functional = degeneracy_functional(cavity, omega, options.residual_tol);
  } catch (const Error& e) {
    report.failures.push_back(std::string("local-optimality probe failed: ") + e.what());
    return report;
  }
  if (std::abs(functional) < 1e-8 * psi_abs_squared_eps_integral(cavity, omega)) {
    report.failures.push_back("omega is degenerate; first-order probe does not apply");
    return report;
  }

  std::mt19937_64 rng(options.seed);
  std::vector<Complex> shifts;
  const int max_attempts = 10 * std::max(options.n_directions, 1);
  for (int attempt = 0; attempt < max_attempts && static_cast<int>(shifts.size()) < options.n_directions;
       ++attempt) {
    const StepFunction h = random_admissible_direction(cavity, rng);
    const Complex response = psi_squared_weighted_integral(cavity, omega, h);
    double scale = 0.0;
    for (const auto& step : h.steps()) scale = std::max(scale, std::abs(step.value));
    if (std::abs(response) <= options.min_response * scale * psi_abs_squared_eps_integral(cavity, omega)) continue;
    const Complex shift = -omega * response / (2.0 * functional);
    shifts.push_back(shift / std::abs(shift));
  }
  report.probe_ran = true;
  report.directions_used = static_cast<int>(shifts.size());

  // Nonnegative combinations a u_i + b u_j with zero real part.
  double worst = -2.0;
  for (const Complex& u : shifts) {
    if (std::abs(u.real()) <= 1e-14) worst = std::max(worst, u.imag());
  }
  for (const Complex& up : shifts) {
    if (!(up.real() > 0.0)) continue;
    for (const Complex& down : shifts) {
      if (!(down.real() < 0.0)) continue;
      worst = std::max(worst, -down.real() * up.imag() + up.real() * down.imag());
    }
  }
  report.worst_descent = worst;
  report.locally_optimal = worst <= options.descent_tol;
  if (!report.locally_optimal) {
    std::ostringstream msg;
    msg << "first-order decrease of the decay rate along Re omega = const: " << worst;
    report.failures.push_back(msg.str());
  }
  if (report.directions_used < options.n_directions) {
    std::ostringstream msg;
    msg << "only " << report.directions_used << " of " << options.n_directions << " probe directions were usable";
    report.failures.push_back(msg.str());
  }
  return report;
}

VerificationReport verify_design(const OptimalDesign& design, const VerifyOptions& options) {
  return verify_design(design.cavity, design.omega(), options);
}

}  // namespace qnm
