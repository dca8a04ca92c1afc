#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qnm/cavity.hpp"

using namespace qnm;
using std::numbers::pi;

TEST_CASE("admissibility reports offending layers") {
  const DesignSpace space{1.0, 2.0, 1.0, 1.0, 1.0};
  CHECK(validate_admissible(Cavity({{1.0, 1.5}}, space)).admissible);
  CHECK(validate_admissible(Cavity({{1.0, 2.0}}, space)).admissible);

  const auto report = validate_admissible(Cavity({{0.5, 1.0}, {0.5, 3.0}}, space));
  CHECK_FALSE(report.admissible);
  REQUIRE(report.violations.size() == 1);
  CHECK(report.violations[0].layer == 1);
  CHECK(report.violations[0].eps == 3.0);
}

TEST_CASE("structural errors") {
  const DesignSpace space{1.0, 2.0, 1.0, 1.0, 1.0};
  CHECK_THROWS_AS(Cavity({}, space), StructuralError);
  CHECK_THROWS_AS(Cavity({{0.0, 1.5}}, space), StructuralError);
  CHECK_THROWS_AS(Cavity({{-1.0, 1.5}}, space), StructuralError);
  CHECK_THROWS_AS(Cavity({{1.0, 0.5}}, space), StructuralError);
  CHECK_THROWS_AS(Cavity({{1.0, 1.5}}, 0.5, 1.0, 2.0), StructuralError);
  CHECK_THROWS_AS(Cavity({{1.0, 1.5}}, 1.0, 2.0, 1.0), StructuralError);
  CHECK_THROWS_AS(Cavity({{1.0, 1.5}}, 1.0, 1.0, 2.0, 0.0), StructuralError);
}

TEST_CASE("layer geometry") {
  const Cavity cav({{0.25, 1.0}, {0.5, 4.0}, {0.25, 1.0}}, DesignSpace{1.0, 4.0, 1.0, 1.0, 1.0});
  CHECK(cav.length() == doctest::Approx(1.0));
  const auto x = cav.interfaces();
  REQUIRE(x.size() == 4);
  CHECK(x.front() == 0.0);
  CHECK(x.back() == cav.length());
  CHECK(cav.eps_at(0.0) == 1.0);
  CHECK(cav.eps_at(0.25) == 4.0);  // right-continuous
  CHECK(cav.eps_at(0.74) == 4.0);
  CHECK(cav.eps_at(1.0) == 1.0);

  const Cavity split({{0.2, 4.0}, {0.3, 4.0}, {0.5, 1.0}}, cav.space());
  const Cavity m = split.merged();
  REQUIRE(m.size() == 2);
  CHECK(m.layers()[0].thickness == doctest::Approx(0.5));
}

TEST_CASE("admissible frequency bound") {
  CHECK(admissible_frequency_bound(DesignSpace{1.0, 4.0, 1.0, 1.0, 1.0}) == doctest::Approx(3.0 * pi / 4.0));
  CHECK(admissible_frequency_bound(DesignSpace{1.0, 9.0, 1.0, 1.0, 1.0}) == doctest::Approx(pi / 6.0));
  CHECK_THROWS_AS(admissible_frequency_bound(DesignSpace{2.0, 2.0, 1.0, 1.0, 1.0}), BoundNotApplicable);
  CHECK_THROWS_AS(admissible_frequency_bound(DesignSpace{1.0, 4.0, 2.0, 1.0, 1.0}), BoundNotApplicable);

  // Every frequency above the bound is the real part of some homogeneous
  // admissible resonance: the bands [lo_m, hi_m] = pi c (m + 1/2)/(l sqrt(eps))
  // for eps in [eps_lo, eps_hi] overlap from there on.
  for (double eps_hi : {2.0, 4.0, 9.0, 16.0}) {
    const DesignSpace space{1.0, eps_hi, 1.0, 1.0, 1.0};
    const double bound = admissible_frequency_bound(space);
    for (double alpha = bound; alpha < bound + 30.0; alpha += 0.01) {
      bool covered = false;
      for (int m = 0; m < 200 && !covered; ++m) {
        const double lo = pi * (m + 0.5) / std::sqrt(eps_hi);
        const double hi = pi * (m + 0.5);
        covered = lo <= alpha + 1e-12 && alpha <= hi + 1e-12;
      }
      CHECK_MESSAGE(covered, "alpha " << alpha << " eps_hi " << eps_hi);
    }
  }
}

TEST_CASE("homogeneous eigenvalues solve the dispersion relation") {
  for (double eps : {1.5, 2.0, 4.0, 9.0}) {
    const DesignSpace space{1.0, 10.0, 1.0, 1.0, 1.0};
    const auto roots = homogeneous_eigenvalues(eps, space, -3, 3);
    for (int n = -3; n <= 3; ++n) {
      const auto ref = oracle::homogeneous_root(eps, 1.0, 1.0, 1.0, n);
      CHECK(std::abs(roots[n + 3] - ref) < 1e-13);
    }
  }
  // eps < eps_outer: integer offsets.
  const DesignSpace inner{1.0, 4.0, 3.0, 1.0, 1.0};
  const auto roots = homogeneous_eigenvalues(1.5, inner, 1, 3);
  for (int n = 1; n <= 3; ++n) {
    const auto ref = oracle::homogeneous_root(1.5, 3.0, 1.0, 1.0, n);
    CHECK(std::abs(roots[n - 1] - ref) < 1e-13);
  }
}

TEST_CASE("homogeneous spectrum is mirror symmetric") {
  const DesignSpace space{1.0, 4.0, 1.0, 1.0, 1.0};
  const auto roots = homogeneous_eigenvalues(2.0, space, -1, 0);
  CHECK(roots[1].real() == doctest::Approx(pi / std::sqrt(2.0) * 0.5));
  CHECK(std::abs(roots[0] + std::conj(roots[1])) < 1e-14);
  CHECK_THROWS_AS(homogeneous_eigenvalues(1.0, space, 0, 1), NoEigenvalues);
}

TEST_CASE("decay rate differs from the eps-in-log variant") {
  const DesignSpace space{1.0, 4.0, 1.0, 1.0, 1.0};
  CHECK(homogeneous_decay_rate(2.0, space) == doctest::Approx(std::log(1.0 + std::sqrt(2.0)) / std::sqrt(2.0)));
  CHECK(std::abs(homogeneous_decay_rate(2.0, space) - oracle::literal_decay_rate(2.0, 1.0, 1.0, 1.0)) > 0.2);
}

TEST_CASE("step functions and perturbed cavities") {
  const auto h = StepFunction::indicator(1.0, 0.2, 0.6, 0.5);
  CHECK(h.value_at(0.1) == 0.0);
  CHECK(h.value_at(0.2) == 0.5);
  CHECK(h.value_at(0.7) == 0.0);
  CHECK(h.length() == doctest::Approx(1.0));
  CHECK_THROWS_AS(StepFunction::indicator(1.0, 0.6, 0.2), StructuralError);

  const Cavity cav({{0.5, 1.0}, {0.5, 3.0}}, DesignSpace{1.0, 4.0, 1.0, 1.0, 1.0});
  const Cavity p = perturbed(cav, h, 2.0);
  REQUIRE(p.size() == 4);
  CHECK(p.eps_at(0.1) == 1.0);
  CHECK(p.eps_at(0.3) == 2.0);
  CHECK(p.eps_at(0.55) == 4.0);
  CHECK(p.eps_at(0.9) == 3.0);
  CHECK(p.length() == doctest::Approx(1.0));
  CHECK_THROWS_AS(perturbed(cav, StepFunction::constant(0.5, 1.0), 1.0), StructuralError);

  const auto knots = common_refinement({0.0, 0.5, 1.0}, {0.0, 0.5 + 1e-15, 0.7, 1.0});
  CHECK(knots.size() == 4);
}
