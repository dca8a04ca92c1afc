#include "qnm/nonlinear_mode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qnm/parallel.hpp"

namespace qnm {

namespace {

constexpr double kPi = std::numbers::pi;
// Im(slope^2) below this fraction of |slope|^2 counts as zero at s = 0.
constexpr double kStartTie = 1e-14;
// Relative depth below which |Psi| counts as a zero.
constexpr double kZeroRatio = 1e-8;

struct Shot {
  FieldState end;
  std::vector<TraceSegment> segments;
  std::vector<double> switch_points;
  std::optional<double> interior_zero;
};

bool high_side(Complex e) { return (e * e).imag() > 0.0; }

// Golden-section minimisation of |E(t)| on [a, b] for a fixed layer.
template <class Eval>
std::pair<double, double> minimise_abs(Eval eval, double a, double b) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a);
  double x2 = a + g * (b - a);
  double f1 = std::abs(eval(x1));
  double f2 = std::abs(eval(x2));
  for (int i = 0; i < 80; ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = std::abs(eval(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = std::abs(eval(x2));
    }
  }
  return f1 < f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

Shot shoot(Complex z, Complex slope, const DesignSpace& space, const SwitchingOptions& options, bool record) {
  space.validate();
  if (slope == Complex(0.0, 0.0)) throw PreconditionError("initial slope must be nonzero");
  if (options.chebyshev_points < 2) throw PreconditionError("need at least two Chebyshev points per step");
  const double l = space.length;
  const double c = space.c;
  Shot shot;
  FieldState state{0.0, slope};

  if (space.eps_lo == space.eps_hi) {
    // Nothing to switch between: the linear solution in a homogeneous cavity.
    const auto m = layer_transfer(wave_number_squared(z, space.eps_lo, c), l);
    if (record) shot.segments.push_back({0.0, l, space.eps_lo, state});
    shot.end = m.apply(state);
    return shot;
  }

  const bool lemma = (z * z).imag() < 0.0;
  const double speed = std::abs(z) * std::sqrt(space.eps_hi) / c;
  const double step_cap = speed > 0.0 ? std::min(l / 16.0, 0.25 / speed) : l / 16.0;
  const int n = options.chebyshev_points;
  std::vector<double> fractions(n);
  for (int j = 1; j <= n; ++j) fractions[j - 1] = 0.5 * (1.0 - std::cos(j * kPi / n));
  fractions.back() = 1.0;

  bool high = starts_on_high(z, slope);
  double s = 0.0;
  double layer_begin = 0.0;
  FieldState layer_start = state;
  int switches = 0;
  const double end_slack = 1e-13 * l;

  while (l - s > end_slack) {
    const double h = std::min(step_cap, l - s);
    const double eps = high ? space.eps_hi : space.eps_lo;
    const Complex k2 = wave_number_squared(z, eps, c);
    auto field = [&](double t) { return layer_transfer(k2, t).apply(state).value; };

    double t_prev = 0.0;
    Complex e_prev = state.value;
    double t_hit = -1.0;
    for (double f : fractions) {
      const double t = h * f;
      const Complex e = field(t);
      if (!lemma && !shot.interior_zero && e_prev != Complex(0.0, 0.0) &&
          std::abs(std::arg(e * std::conj(e_prev))) > 0.5 * kPi) {
        const auto [t_min, e_min] = minimise_abs(field, t_prev, t);
        if (e_min < kZeroRatio * std::max(std::abs(e), std::abs(e_prev))) shot.interior_zero = s + t_min;
      }
      if (high_side(e) != high) {
        t_hit = t;
        break;
      }
      t_prev = t;
      e_prev = e;
    }

    if (t_hit < 0.0) {
      state = layer_transfer(k2, h).apply(state);
      s = (h == l - s) ? l : s + h;
      continue;
    }

    // Bisect Im Psi^2 = 0 down to roundoff.
    double lo = t_prev;
    double hi = t_hit;
    while (hi - lo > 1e-15 * l) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (high_side(field(mid)) == high ? lo : hi) = mid;
    }
    const double t_switch = 0.5 * (lo + hi);
    state = layer_transfer(k2, t_switch).apply(state);
    s += t_switch;
    if (l - s <= end_slack) {
      s = l;
      break;
    }
    if (++switches > options.max_switches) {
      std::ostringstream msg;
      msg << "more than " << options.max_switches << " permittivity switches before s = " << s;
      throw RunawaySwitching(msg.str());
    }
    if (record) {
      shot.segments.push_back({layer_begin, s, eps, layer_start});
      shot.switch_points.push_back(s);
    }
    high = !high;
    layer_begin = s;
    layer_start = state;
  }
  if (record) shot.segments.push_back({layer_begin, l, high ? space.eps_hi : space.eps_lo, layer_start});
  shot.end = state;
  return shot;
}

}  // namespace

bool starts_on_high(Complex z, Complex initial_slope) {
  const Complex s2 = initial_slope * initial_slope;
  if (std::abs(s2.imag()) > kStartTie * std::norm(initial_slope)) return s2.imag() > 0.0;
  // slope^2 is real here and Psi^2 = slope^2 (s^2 - z^2 eps s^4 / (3 c^2)) + ...
  return -s2.real() * (z * z).imag() > 0.0;
}

NonlinearMode integrate_switching(Complex z, Complex initial_slope, const DesignSpace& space,
                                  const SwitchingOptions& options) {
  Shot shot = shoot(z, initial_slope, space, options, true);
  std::vector<Layer> layers;
  layers.reserve(shot.segments.size());
  for (const auto& seg : shot.segments) layers.push_back({seg.end - seg.begin, seg.eps});
  Cavity induced(std::move(layers), space);
  const Complex w = radiation_mismatch(z, shot.end, space.eps_outer, space.c);
  ModeTrace trace(z, space.c, std::move(shot.segments), std::move(shot.switch_points), options.samples_per_layer);
  return {z, std::arg(initial_slope), std::move(trace), std::move(induced), w, (z * z).imag() < 0.0,
          shot.interior_zero};
}

NonlinearMode integrate_psi(Complex z, double theta, const DesignSpace& space, const SwitchingOptions& options) {
  auto mode = integrate_switching(z, std::polar(1.0, theta), space, options);
  mode.theta = theta;
  return mode;
}

Complex eval_W(Complex z, double theta, const DesignSpace& space, const SwitchingOptions& options) {
  const Shot shot = shoot(z, std::polar(1.0, theta), space, options, false);
  return radiation_mismatch(z, shot.end, space.eps_outer, space.c);
}

namespace {

struct Point {
  double s;
  Complex e;
  Complex de;
};

Point point_at(const ModeTrace& trace, double s) {
  const FieldState f = trace.at(s);
  return {s, f.value, f.slope};
}

double k2_modulus_at(const ModeTrace& trace, double s) {
  const auto& segs = trace.segments();
  auto it = std::upper_bound(segs.begin(), segs.end(), s,
                             [](double x, const TraceSegment& seg) { return x < seg.end; });
  const double eps = it == segs.end() ? segs.back().eps : it->eps;
  return std::norm(trace.z()) * std::abs(eps) / (trace.c() * trace.c());
}

// On [a, b] with constant k^2, sup|E'| <= (|E'(a)| + h |k^2| |E(a)|) / (1 - h^2 |k^2|).
// When h sup|E'| < |E(a)| the curve stays in a disc around E(a) that misses
// the origin, so the change of arg E^2 lies in (-pi, pi) and the principal
// value of the sampled jump is exact. Otherwise the interval is halved.
bool check_interval(const ModeTrace& trace, const Point& a, const Point& b, int depth, MonotonicityReport& report) {
  const double h = b.s - a.s;
  const double mid = a.s + 0.5 * h;
  const double k2 = k2_modulus_at(trace, mid);
  const double denom = 1.0 - h * h * k2;
  const double slope_bound = denom > 0.0 ? (std::abs(a.de) + h * k2 * std::abs(a.e)) / denom
                                         : std::numeric_limits<double>::infinity();
  if (!(h * slope_bound < 0.5 * std::abs(a.e))) {
    if (depth <= 0 || !(mid > a.s && mid < b.s)) {
      report = {MonotonicityReport::Status::interior_zero, a.s, b.s,
                "phase does not resolve under refinement; the solution vanishes here"};
      return false;
    }
    const Point m = point_at(trace, mid);
    return check_interval(trace, a, m, depth - 1, report) && check_interval(trace, m, b, depth - 1, report);
  }
  const double jump = std::arg((b.e * b.e) * std::conj(a.e * a.e));
  if (!(jump > 0.0)) {
    std::ostringstream msg;
    msg << "arg E^2 changes by " << jump << " on [" << a.s << ", " << b.s << "]";
    report = {MonotonicityReport::Status::violated, a.s, b.s, msg.str()};
    return false;
  }
  return true;
}

}  // namespace

MonotonicityReport arg_monotonicity_check(const ModeTrace& trace) {
  const Complex z2 = trace.z() * trace.z();
  if (!(z2.imag() < 0.0)) {
    return {MonotonicityReport::Status::skipped, 0.0, 0.0,
            "Im z^2 >= 0: monotonicity of arg E^2 is not guaranteed, check skipped"};
  }
  std::vector<Point> points;
  points.reserve(trace.samples().size());
  for (const auto& p : trace.samples()) {
    if (p.s > 0.0) points.push_back(point_at(trace, p.s));
  }
  MonotonicityReport report;
  if (points.empty()) return report;
  if (points.front().e == Complex(0.0, 0.0)) {
    return {MonotonicityReport::Status::interior_zero, 0.0, points.front().s, "solution vanishes inside (0, l]"};
  }
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (!check_interval(trace, points[i], points[i + 1], 60, report)) return report;
  }
  return report;
}

std::vector<WSample> sample_W(double alpha, double beta_min, double beta_max, int n_theta, int n_beta,
                              const DesignSpace& space, const SwitchingOptions& options) {
  if (n_theta < 1 || n_beta < 1) throw StructuralError("W grid needs at least one node per axis");
  if (!(beta_min <= beta_max)) throw StructuralError("W grid needs beta_min <= beta_max");
  space.validate();
  std::vector<WSample> out(static_cast<std::size_t>(n_theta) * n_beta);
  parallel_for(out.size(), [&](std::size_t idx) {
    const int i = static_cast<int>(idx % n_theta);
    const int j = static_cast<int>(idx / n_theta);
    const double theta = -kPi + 2.0 * kPi * (i + 1) / n_theta;
    const double beta = n_beta == 1 ? beta_min : beta_min + (beta_max - beta_min) * j / (n_beta - 1);
    out[idx] = {theta, beta, eval_W(Complex(alpha, -beta), theta, space, options)};
  });
  return out;
}

double wrap_angle(double theta) {
  double t = std::remainder(theta, 2.0 * kPi);
  if (t <= -kPi) t += 2.0 * kPi;
  return t;
}

}  // namespace qnm
