#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "qnm/linear_solver.hpp"
#include "qnm/optimizer.hpp"
#include "qnm/perturbation.hpp"

using namespace qnm;
using std::numbers::pi;

namespace {

const DesignSpace kSpace{1.0, 4.0, 1.0, 1.0, 1.0};

std::string to_string_steps(const StepFunction& h) {
  std::string out;
  for (const auto& s : h.steps()) out += std::to_string(s.length) + ":" + std::to_string(s.value) + ";";
  return out;
}

const OptimalDesign& design_at_3() {
  static const OptimalDesign d = optimize(3.0, kSpace);
  return d;
}

}  // namespace

TEST_CASE("best homogeneous reference") {
  const auto ref = best_homogeneous(3.0, kSpace);
  CHECK(ref.eps == doctest::Approx(pi * pi / 4.0));
  CHECK(ref.frequency_gap < 1e-12);
  CHECK(ref.omega.real() == doctest::Approx(3.0));
  CHECK(ref.beta == doctest::Approx(homogeneous_decay_rate(ref.eps, kSpace)));
  CHECK(default_beta_max(3.0, kSpace) == doctest::Approx(2.0 * ref.beta));
  // Below every band: nearest band edge.
  const auto low = best_homogeneous(0.2, kSpace);
  CHECK(low.frequency_gap > 0.0);
  CHECK(low.eps == 4.0);
}

TEST_CASE("optimised design at alpha = 3") {
  const auto& d = design_at_3();
  CHECK(d.beta_min > 0.0);
  CHECK(d.linear_residual < 1e-8);
  CHECK(std::abs(char_fn(d.cavity, d.omega())) < 1e-8);
  CHECK(validate_admissible(d.cavity).admissible);
  for (const auto& l : d.cavity.layers()) CHECK((l.eps == 1.0 || l.eps == 4.0));
  CHECK(d.beta_min < best_homogeneous(3.0, kSpace).beta);
  REQUIRE_FALSE(d.all_roots.empty());
  CHECK(d.all_roots.front().beta == d.beta_min);
  for (const auto& r : d.all_roots) {
    CHECK(r.beta >= d.beta_min);
    CHECK(r.beta <= d.beta_max);
    const auto mode = integrate_psi(Complex(3.0, -r.beta), r.theta, kSpace);
    CHECK(std::abs(char_fn(mode.induced_cavity, Complex(3.0, -r.beta))) < 1e-8);
  }
  CHECK(d.cavity.size() == d.mode.trace.switch_points().size() + 1);
}

TEST_CASE("negative frequency through the mirror") {
  const auto& d = design_at_3();
  const auto m = optimize(-3.0, kSpace);
  CHECK(m.beta_min == d.beta_min);
  CHECK(m.theta_star == doctest::Approx(wrap_angle(pi / 2 - d.theta_star)));
  REQUIRE(m.cavity.size() == d.cavity.size());
  for (std::size_t i = 0; i < d.cavity.size(); ++i) {
    CHECK(m.cavity.layers()[i].eps == d.cavity.layers()[i].eps);
    CHECK(m.cavity.layers()[i].thickness == doctest::Approx(d.cavity.layers()[i].thickness).epsilon(1e-10));
  }
  CHECK(m.linear_residual < 1e-8);
  CHECK_THROWS_AS(optimize(0.0, kSpace), PreconditionError);
}

TEST_CASE("equal bounds collapse to the homogeneous cavity") {
  const DesignSpace flat{2.0, 2.0, 1.0, 1.0, 1.0};
  const double alpha = pi / std::sqrt(2.0) * 0.5;
  const auto d = optimize(alpha, flat);
  const double beta = homogeneous_decay_rate(2.0, flat);
  CHECK(std::abs(d.beta_min - beta) < 1e-8);
  CHECK(d.all_roots.size() > 1);
  for (const auto& r : d.all_roots) CHECK(std::abs(r.beta - beta) < 1e-8);
}

TEST_CASE("no zero in the scanned range") {
  OptimizerOptions opts;
  opts.beta_max = 0.05;
  try {
    optimize(0.3, kSpace, opts);
    FAIL("expected NoZeroFound");
  } catch (const NoZeroFound& e) {
    CHECK(e.min_abs_w() > 0.0);
    REQUIRE(e.frequency_bound().has_value());
    CHECK(*e.frequency_bound() == doctest::Approx(3 * pi / 4));
  }
}

TEST_CASE("verification") {
  const auto& d = design_at_3();
  const auto ok = verify_design(d);
  CHECK(ok.passed());
  CHECK(ok.locally_optimal);
  CHECK(ok.directions_used == 100);

  auto layers = d.cavity.layers();
  layers[0].thickness *= 1.01;
  const auto moved = verify_design(d.cavity.with_layers(layers), d.omega());
  CHECK_FALSE(moved.residual_ok);
  CHECK_FALSE(moved.passed());

  layers = d.cavity.layers();
  layers[1].eps = 2.5;
  const auto mixed = verify_design(d.cavity.with_layers(layers), d.omega());
  CHECK_FALSE(mixed.bang_bang);
  CHECK_FALSE(mixed.passed());

  // A homogeneous cavity resonating at alpha is not optimal.
  const auto ref = best_homogeneous(3.0, kSpace);
  const auto homog = verify_design(Cavity::homogeneous(ref.eps, kSpace), ref.omega);
  CHECK(homog.residual_ok);
  CHECK_FALSE(homog.bang_bang);
  CHECK_FALSE(homog.locally_optimal);
  CHECK(homog.worst_descent > 1e-3);
}

TEST_CASE("random admissible directions") {
  const auto& d = design_at_3();
  std::mt19937_64 a(5), b(5);
  for (int k = 0; k < 50; ++k) {
    const auto h = random_admissible_direction(d.cavity, a);
    const auto g = random_admissible_direction(d.cavity, b);
    CHECK(to_string_steps(h) == to_string_steps(g));
    CHECK(max_feasible_step(d.cavity, h) >= 1.0 - 1e-12);
    CHECK(h.length() == doctest::Approx(d.cavity.length()));
  }
}
