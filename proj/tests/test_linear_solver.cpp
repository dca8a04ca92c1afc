#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qnm/linear_solver.hpp"

using namespace qnm;

namespace {

const DesignSpace kSpace{1.0, 4.0, 1.0, 1.0, 1.0};

double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Composite Simpson on the exact trace, piece by piece between breakpoints.
Complex simpson(const ModeTrace& t, const std::vector<double>& knots,
                const std::function<Complex(double, Complex)>& g, int n = 2000) {
  Complex total = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double a = knots[k];
    const double h = (knots[k + 1] - a) / n;
    const double mid = 0.5 * (a + knots[k + 1]);
    Complex sum = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double s = a + i * h;
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      // Evaluate the weight at the piece midpoint so jumps never leak across.
      sum += w * g(mid, t.at(s).value);
    }
    total += sum * h / 3.0;
  }
  return total;
}

}  // namespace

TEST_CASE("vacuum cavity closed forms") {
  const Cavity vac = Cavity::homogeneous(1.0, kSpace);
  for (Complex z : {Complex(0.7, -0.3), Complex(3.1, 0.2), Complex(-2.0, -1.0), Complex(12.0, -0.5)}) {
    const auto p = propagate(vac, z);
    CHECK(rel(p.psi, std::sin(z) / z) < 1e-13);
    CHECK(rel(p.phi, std::cos(z)) < 1e-13);
    CHECK(rel(char_fn(vac, z), -std::exp(-kI * z)) < 1e-13);
    CHECK(rel(char_fn_dz(vac, z), kI * std::exp(-kI * z)) < 1e-12);
  }
  const auto p0 = propagate(vac, 0.0);
  CHECK(std::abs(p0.psi - 1.0) < 1e-15);
  CHECK(std::abs(p0.phi - 1.0) < 1e-15);
  CHECK(std::abs(char_fn(vac, 0.0) + 1.0) < 1e-15);
  const Cavity layered({{0.3, 2.0}, {0.7, 3.5}}, kSpace);
  const auto q0 = propagate(layered, 0.0);
  CHECK(std::abs(q0.psi - 1.0) < 1e-15);
  CHECK(std::abs(q0.dpsi - 1.0) < 1e-15);
  CHECK(std::abs(q0.dphi) < 1e-15);
}

TEST_CASE("wronskian stays one") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const Cavity cav = oracle::random_cavity(rng, 1 + trial % 5, kSpace);
    const Complex z(8.0 * u(rng), -std::abs(2.0 * u(rng)));
    CHECK(std::abs(propagate(cav, z).wronskian() - 1.0) < 1e-11);
  }
}

TEST_CASE("transfer matrices agree with Picard iteration") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Cavity cav = oracle::random_cavity(rng, 2, kSpace);
    const Complex z(6.0 * u(rng), 1.5 * u(rng));
    const auto p = propagate(cav, z);
    const auto ref = oracle::psi_end(cav, z);
    const double scale = std::abs(ref[0]) + std::abs(ref[1]);
    CHECK(std::abs(p.psi - ref[0]) < 1e-10 * scale);
    CHECK(std::abs(p.dpsi - ref[1]) < 1e-10 * scale);
  }
}

TEST_CASE("transfer derivative in k^2 across the series switch") {
  for (Complex k2 : {Complex(1e-18, 0.0), Complex(0.3, -0.1), Complex(0.49, 0.0), Complex(0.51, 0.0),
                     Complex(4.0, -1.0), Complex(-3.0, 0.5), Complex(90.0, -20.0)}) {
    const double dt = 0.9;
    const double h = 1e-6 * (1.0 + std::abs(k2));
    const auto d = layer_transfer_dk2(k2, dt);
    const auto p = layer_transfer(k2 + h, dt);
    const auto m = layer_transfer(k2 - h, dt);
    CHECK(std::abs(d.a - (p.a - m.a) / (2 * h)) < 1e-7 * (1 + std::abs(d.a)));
    CHECK(std::abs(d.b - (p.b - m.b) / (2 * h)) < 1e-7 * (1 + std::abs(d.b)));
    CHECK(std::abs(d.c - (p.c - m.c) / (2 * h)) < 1e-7 * (1 + std::abs(d.c)));
    CHECK(std::abs(d.d - (p.d - m.d) / (2 * h)) < 1e-7 * (1 + std::abs(d.d)));
  }
  const auto tiny = layer_transfer(Complex(1e-20, 0.0), 2.0);
  CHECK(std::abs(tiny.b - 2.0) < 1e-15);
}

TEST_CASE("char_fn_dz matches central differences") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const Cavity cav = oracle::random_cavity(rng, 1 + trial % 4, kSpace);
    const Complex z = trial == 0 ? Complex(0.0) : Complex(8.0 * u(rng), 1.5 * u(rng));
    const double h = 1e-6 * (1.0 + std::abs(z));
    const Complex fd = (char_fn(cav, z + h) - char_fn(cav, z - h)) / (2.0 * h);
    CHECK(rel(char_fn_dz(cav, z), fd) < 1e-6);
  }
}

TEST_CASE("homogeneous root and the eps-in-log variant") {
  const DesignSpace space{1.0, 4.0, 1.0, 1.0, 1.0};
  const Cavity cav = Cavity::homogeneous(2.0, space);
  const Complex w0 = oracle::homogeneous_root(2.0, 1.0, 1.0, 1.0, 0);
  CHECK(std::abs(char_fn(cav, w0)) < 1e-10);
  const Complex literal(w0.real(), -oracle::literal_decay_rate(2.0, 1.0, 1.0, 1.0));
  CHECK(std::abs(char_fn(cav, literal)) > 0.1);

  CHECK(rel(dz_at_eigenvalue(cav, w0), char_fn_dz(cav, w0)) < 1e-8);
  CHECK_THROWS_AS(dz_at_eigenvalue(cav, Complex(2.0, -0.1)), PreconditionError);
  CHECK_THROWS_AS(psi_end_at_eigenvalue(cav, Complex(2.0, -0.1)), PreconditionError);
}

TEST_CASE("integrals of psi^2 against Simpson") {
  const Cavity cav({{0.3, 3.0}, {0.45, 1.2}, {0.25, 2.6}}, kSpace);
  const Complex z(4.3, -0.6);
  const auto t = trace_mode(cav, z);
  const auto x = cav.interfaces();
  CHECK(rel(psi_squared_eps_integral(cav, z),
            simpson(t, x, [&](double s, Complex e) { return e * e * cav.eps_at(s); })) < 1e-11);
  CHECK(std::abs(psi_abs_squared_eps_integral(cav, z) -
                 simpson(t, x, [&](double s, Complex e) { return std::norm(e) * cav.eps_at(s); }).real()) <
        1e-11 * psi_abs_squared_eps_integral(cav, z));
  const auto h = StepFunction::indicator(1.0, 0.1, 0.6, 2.0);
  const auto knots = common_refinement(x, h.breakpoints());
  CHECK(rel(psi_squared_weighted_integral(cav, z, h),
            simpson(t, knots, [&](double s, Complex e) { return e * e * h.value_at(s); })) < 1e-11);
}

TEST_CASE("directional derivative at eigenvalues") {
  const DesignSpace space{1.0, 4.0, 1.0, 1.0, 1.0};
  const Cavity cav = Cavity::homogeneous(2.0, space);
  const Complex w0 = oracle::homogeneous_root(2.0, 1.0, 1.0, 1.0, 1);
  CHECK(std::abs(directional_derivative(cav, w0, StepFunction::constant(1.0, 0.0))) == 0.0);

  const auto h1 = StepFunction::indicator(1.0, 0.2, 0.5);
  const auto h2 = StepFunction::indicator(1.0, 0.5, 0.9, -0.3);
  const StepFunction sum({{0.2, 0.0}, {0.3, 1.0}, {0.4, -0.3}, {0.1, 0.0}});
  const Complex d1 = directional_derivative(cav, w0, h1);
  const Complex d2 = directional_derivative(cav, w0, h2);
  CHECK(std::abs(directional_derivative(cav, w0, sum) - (d1 + d2)) < 1e-13 * std::abs(d1 + d2));

  const double zeta = 1e-6;
  const Complex fd = (char_fn(perturbed(cav, h1, zeta), w0) - char_fn(cav, w0)) / zeta;
  CHECK(rel(d1, fd) < 1e-5);
}

TEST_CASE("mode trace") {
  const Cavity cav({{0.4, 3.0}, {0.6, 1.5}}, kSpace);
  const Complex z(2.5, -0.4);
  const auto t = trace_mode(cav, z, 1.0, 8);
  const auto p = propagate(cav, z);
  CHECK(std::abs(t.at(1.0).value - p.psi) < 1e-14);
  CHECK(std::abs(t.samples().back().de - p.dpsi) < 1e-14);
  CHECK(t.samples().size() == 17);
  const std::string csv = t.to_csv();
  CHECK(csv.rfind("s,re_e,im_e,re_de,im_de\n", 0) == 0);
  const auto scaled = trace_mode(cav, z, Complex(0.0, 2.0), 8);
  CHECK(std::abs(scaled.at(0.7).value - Complex(0.0, 2.0) * t.at(0.7).value) < 1e-14);
}
