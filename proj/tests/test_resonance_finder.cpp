#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qnm/linear_solver.hpp"
#include "qnm/resonance_finder.hpp"

using namespace qnm;

TEST_CASE("homogeneous window holds exactly the closed-form roots") {
  const DesignSpace space{1.0, 4.0, 1.0, 1.0, 1.0};
  const Cavity cav = Cavity::homogeneous(2.0, space);
  SearchWindow w{0.0, 8.0, -1.0, 0.0};
  const auto found = find_resonances(cav, w);
  std::vector<Complex> expected;
  for (int n = -5; n <= 10; ++n) {
    const Complex r = oracle::homogeneous_root(2.0, 1.0, 1.0, 1.0, n);
    if (w.contains(r)) expected.push_back(r);
  }
  REQUIRE(expected.size() == 4);
  REQUIRE(found.roots.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(std::abs(found.roots[i].omega - expected[i]) < 1e-9);
    CHECK(found.roots[i].residual < 1e-10);
    CHECK(std::abs(found.roots[i].degeneracy_indicator) > 1e-3);
  }
}

TEST_CASE("matched cavity has no resonances") {
  const DesignSpace space{1.0, 4.0, 1.0, 1.0, 1.0};
  const auto found = find_resonances(Cavity::homogeneous(1.0, space), SearchWindow{0.0, 10.0, -1.5, 0.0});
  CHECK(found.roots.empty());
}

TEST_CASE("quarter-wave stack against modulus minimisation") {
  // n1 t1 = n2 t2 with n = sqrt(eps): quarter wave at z = 3 pi / 4.
  const Cavity cav({{1.0 / 3.0, 4.0}, {2.0 / 3.0, 1.0}}, DesignSpace{1.0, 4.0, 1.0, 1.0, 1.0});
  const auto found = find_resonances(cav, SearchWindow{1.5, 3.0, -1.5, 0.0, 60, 40});
  REQUIRE(found.roots.size() >= 1);
  for (const auto& r : found.roots) {
    const Complex ref = oracle::minimise_modulus([&](Complex z) { return std::abs(oracle::char_fn(cav, z)); },
                                                 r.omega + Complex(0.02, -0.015), 0.01);
    CHECK(std::abs(r.omega - ref) < 1e-8);
  }
}

TEST_CASE("polish behaviour") {
  const DesignSpace space{1.0, 4.0, 1.0, 1.0, 1.0};
  const Cavity cav = Cavity::homogeneous(2.0, space);
  const Complex root = oracle::homogeneous_root(2.0, 1.0, 1.0, 1.0, 1);
  const auto r = polish(cav, root + Complex(1e-3, 0.0));
  CHECK(r.newton_iters <= 6);
  CHECK(std::abs(r.omega - root) < 1e-12);
  CHECK(polish(cav, r.omega).newton_iters == 0);

  // F = -exp(-iz): Newton walks straight down, no root to find.
  const Cavity vac = Cavity::homogeneous(1.0, space);
  CHECK_THROWS_AS(polish(vac, Complex(1.0, -0.5), PolishOptions{1e-10, 20}), ConvergenceError);
}

TEST_CASE("window validation") {
  const DesignSpace space{1.0, 4.0, 1.0, 1.0, 1.0};
  const Cavity cav = Cavity::homogeneous(2.0, space);
  CHECK_THROWS_AS(find_resonances(cav, SearchWindow{0.0, 1.0, -1.0, 0.5}), StructuralError);
  CHECK_THROWS_AS(find_resonances(cav, SearchWindow{1.0, 0.0, -1.0, 0.0}), StructuralError);
  CHECK_THROWS_AS(find_resonances(cav, SearchWindow{0.0, 1.0, -1.0, 0.0, 1, 10}), StructuralError);
  CHECK_THROWS_AS(find_resonances(cav, SearchWindow{0.0, 1.0, -1.0, 0.0, 10, 10, 0.0}), StructuralError);
}

TEST_CASE("random cavities: roots are sorted, simple and mirror symmetric") {
  std::mt19937_64 rng(21);
  const DesignSpace space{1.0, 4.0, 1.0, 1.0, 1.0};
  for (int trial = 0; trial < 6; ++trial) {
    const Cavity cav = oracle::random_cavity(rng, 2 + trial % 3, space);
    const auto found = find_resonances(cav, SearchWindow{0.0, 9.0, -1.5, 0.0, 120, 40});
    CHECK(found.roots.size() >= 2);
    for (std::size_t i = 0; i < found.roots.size(); ++i) {
      const auto& r = found.roots[i];
      CHECK(r.residual < 1e-10);
      CHECK(std::abs(char_fn(cav, -std::conj(r.omega))) < 1e-8);
      if (i) CHECK(found.roots[i - 1].omega.real() <= r.omega.real());
      for (std::size_t j = 0; j < i; ++j) CHECK(std::abs(found.roots[j].omega - r.omega) > 1e-6);
    }
  }
}
