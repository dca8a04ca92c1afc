#include "qnm/linear_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qnm/profile_io.hpp"
#include "qnm/quadrature.hpp"

namespace qnm {

namespace {

// |k dt| below which the entries switch to their Taylor forms.
constexpr double kSmallPhase = 1e-8;
// |k^2 dt^2| below which d sinc(sqrt(x))/dx is summed as a series.
constexpr double kSeriesArgument = 0.5;
constexpr double kQuadratureTol = 1e-12;

// d/dx sinc(sqrt(x)) = sum_{n>=1} n (-1)^n x^{n-1} / (2n+1)!
Complex sinc_sqrt_derivative(Complex x) {
  if (std::abs(x) < kSeriesArgument) {
    Complex sum{0.0, 0.0};
    Complex power{1.0, 0.0};
    double factorial = 6.0;  // 3!
    double sign = -1.0;
    for (int n = 1; n <= 14; ++n) {
      sum += sign * static_cast<double>(n) * power / factorial;
      power *= x;
      factorial *= (2.0 * n + 2.0) * (2.0 * n + 3.0);
      sign = -sign;
    }
    return sum;
  }
  const Complex r = std::sqrt(x);
  return (std::cos(r) - std::sin(r) / r) / (2.0 * x);
}

}  // namespace

TransferMatrix layer_transfer(Complex k2, double dt) {
  const Complex x = k2 * (dt * dt);
  const Complex phase = std::sqrt(x);
  Complex a;
  Complex b;
  if (std::abs(phase) < kSmallPhase) {
    a = 1.0 - 0.5 * x;
    b = dt * (1.0 - x / 6.0);
  } else {
    a = std::cos(phase);
    b = dt * (std::sin(phase) / phase);
  }
  return {a, b, -k2 * b, a};
}

TransferMatrix layer_transfer_dk2(Complex k2, double dt) {
  const TransferMatrix m = layer_transfer(k2, dt);
  const Complex da = -0.5 * dt * m.b;
  const Complex db = dt * dt * dt * sinc_sqrt_derivative(k2 * (dt * dt));
  return {da, db, -m.b - k2 * db, da};
}

Complex radiation_mismatch(Complex z, const FieldState& end, double eps_outer, double c) {
  return kI * z * (std::sqrt(eps_outer) / c) * end.value - end.slope;
}

FundamentalPair propagate(const Cavity& cavity, Complex z) {
  FieldState psi{0.0, 1.0};
  FieldState phi{1.0, 0.0};
  for (const auto& layer : cavity.layers()) {
    const auto m = layer_transfer(wave_number_squared(z, layer.eps, cavity.c()), layer.thickness);
    psi = m.apply(psi);
    phi = m.apply(phi);
  }
  return {cavity.length(), psi.value, psi.slope, phi.value, phi.slope};
}

ModeTrace::ModeTrace(Complex z, double c, std::vector<TraceSegment> segments, std::vector<double> switch_points,
                     int samples_per_segment)
    : z_(z), c_(c), segments_(std::move(segments)), switch_points_(std::move(switch_points)) {
  if (segments_.empty()) throw StructuralError("mode trace needs at least one segment");
  const int per = std::max(samples_per_segment, 1);
  samples_.reserve(segments_.size() * per + 1);
  for (const auto& seg : segments_) {
    const auto k2 = wave_number_squared(z_, seg.eps, c_);
    const double len = seg.end - seg.begin;
    for (int j = 0; j < per; ++j) {
      const double t = len * j / per;
      const auto state = layer_transfer(k2, t).apply(seg.start);
      samples_.push_back({seg.begin + t, state.value, state.slope});
    }
  }
  const auto end = at(length());
  samples_.push_back({length(), end.value, end.slope});
}

FieldState ModeTrace::at(double s) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), s,
                             [](double v, const TraceSegment& seg) { return v < seg.begin; });
  const TraceSegment& seg = it == segments_.begin() ? segments_.front() : *std::prev(it);
  return layer_transfer(wave_number_squared(z_, seg.eps, c_), s - seg.begin).apply(seg.start);
}

std::string ModeTrace::to_csv() const {
  std::ostringstream out;
  out << "s,re_e,im_e,re_de,im_de\n";
  for (const auto& p : samples_) {
    out << format_double(p.s) << ',' << format_double(p.e.real()) << ',' << format_double(p.e.imag()) << ','
        << format_double(p.de.real()) << ',' << format_double(p.de.imag()) << '\n';
  }
  return out.str();
}

ModeTrace trace_mode(const Cavity& cavity, Complex z, Complex initial_slope, int samples_per_layer) {
  std::vector<TraceSegment> segments;
  segments.reserve(cavity.size());
  FieldState state{0.0, initial_slope};
  double s = 0.0;
  for (const auto& layer : cavity.layers()) {
    segments.push_back({s, s + layer.thickness, layer.eps, state});
    state = layer_transfer(wave_number_squared(z, layer.eps, cavity.c()), layer.thickness).apply(state);
    s += layer.thickness;
  }
  segments.back().end = cavity.length();
  return ModeTrace(z, cavity.c(), std::move(segments), {}, samples_per_layer);
}

Complex char_fn(const Cavity& cavity, Complex z) {
  const auto pair = propagate(cavity, z);
  return radiation_mismatch(z, {pair.psi, pair.dpsi}, cavity.eps_outer(), cavity.c());
}

CharacteristicValue char_fn_with_derivative(const Cavity& cavity, Complex z) {
  FieldState psi{0.0, 1.0};
  FieldState dpsi{0.0, 0.0};
  const double c2 = cavity.c() * cavity.c();
  for (const auto& layer : cavity.layers()) {
    const Complex k2 = wave_number_squared(z, layer.eps, cavity.c());
    const Complex dk2 = 2.0 * z * layer.eps / c2;
    const auto m = layer_transfer(k2, layer.thickness);
    const auto mk = layer_transfer_dk2(k2, layer.thickness);
    const auto from_matrix = mk.apply(psi);
    const auto from_state = m.apply(dpsi);
    dpsi = {dk2 * from_matrix.value + from_state.value, dk2 * from_matrix.slope + from_state.slope};
    psi = m.apply(psi);
  }
  const double q = std::sqrt(cavity.eps_outer()) / cavity.c();
  const Complex f = kI * z * q * psi.value - psi.slope;
  const Complex df = kI * q * psi.value + kI * z * q * dpsi.value - dpsi.slope;
  return {f, df, psi};
}

Complex char_fn_dz(const Cavity& cavity, Complex z) { return char_fn_with_derivative(cavity, z).df; }

namespace {

// Sum over pieces of the common refinement of int psi^2 w, where w is the
// piecewise-constant weight supplied by `weight(mid)`.
template <class Weight>
Complex integrate_psi_squared(const Cavity& cavity, Complex z, const std::vector<double>& knots, Weight weight) {
  Complex total{0.0, 0.0};
  FieldState state{0.0, 1.0};
  const double tol = kQuadratureTol / static_cast<double>(std::max<std::size_t>(knots.size() - 1, 1));
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double a = knots[i];
    const double b = knots[i + 1];
    const double mid = 0.5 * (a + b);
    const Complex k2 = wave_number_squared(z, cavity.eps_at(mid), cavity.c());
    const double w = weight(mid);
    if (w != 0.0) {
      const FieldState start = state;
      const Complex piece = integrate_adaptive(
          [&](double t) {
            const Complex e = layer_transfer(k2, t).apply(start).value;
            return e * e;
          },
          0.0, b - a, tol / std::max(std::abs(w), 1.0));
      total += w * piece;
    }
    state = layer_transfer(k2, b - a).apply(state);
  }
  return total;
}

}  // namespace

Complex psi_squared_eps_integral(const Cavity& cavity, Complex z) {
  return integrate_psi_squared(cavity, z, cavity.interfaces(), [&](double s) { return cavity.eps_at(s); });
}

Complex psi_squared_weighted_integral(const Cavity& cavity, Complex z, const StepFunction& h) {
  if (std::abs(h.length() - cavity.length()) > 1e-10 * cavity.length()) {
    throw StructuralError("direction length does not match cavity length");
  }
  auto knots = common_refinement(cavity.interfaces(), h.breakpoints());
  knots.back() = cavity.length();
  return integrate_psi_squared(cavity, z, knots, [&](double s) { return h.value_at(s); });
}

double psi_abs_squared_eps_integral(const Cavity& cavity, Complex z) {
  double total = 0.0;
  FieldState state{0.0, 1.0};
  for (const auto& layer : cavity.layers()) {
    const Complex k2 = wave_number_squared(z, layer.eps, cavity.c());
    const FieldState start = state;
    total += layer.eps * integrate_adaptive(
                             [&](double t) { return Complex(std::norm(layer_transfer(k2, t).apply(start).value)); },
                             0.0, layer.thickness, kQuadratureTol)
                             .real();
    state = layer_transfer(k2, layer.thickness).apply(state);
  }
  return total;
}

Complex psi_end_at_eigenvalue(const Cavity& cavity, Complex omega, double residual_tol) {
  const auto pair = propagate(cavity, omega);
  const Complex f = radiation_mismatch(omega, {pair.psi, pair.dpsi}, cavity.eps_outer(), cavity.c());
  if (std::abs(f) > residual_tol) {
    std::ostringstream msg;
    msg << "omega = " << omega << " is not an eigenvalue: |F| = " << std::abs(f);
    throw PreconditionError(msg.str());
  }
  if (pair.psi == Complex(0.0, 0.0)) {
    throw Error("psi(l) vanishes at an eigenvalue; inconsistent propagation");
  }
  return pair.psi;
}

Complex dz_at_eigenvalue(const Cavity& cavity, Complex omega, double residual_tol) {
  const Complex psi_l = psi_end_at_eigenvalue(cavity, omega, residual_tol);
  const double c = cavity.c();
  return 2.0 * omega / (c * c * psi_l) * psi_squared_eps_integral(cavity, omega) +
         kI * (std::sqrt(cavity.eps_outer()) / c) * psi_l;
}

Complex directional_derivative(const Cavity& cavity, Complex omega, const StepFunction& h, double residual_tol) {
  const Complex psi_l = psi_end_at_eigenvalue(cavity, omega, residual_tol);
  const double c = cavity.c();
  return omega * omega / (c * c * psi_l) * psi_squared_weighted_integral(cavity, omega, h);
}

}  // namespace qnm
