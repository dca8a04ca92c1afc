#include "qnm/cavity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qnm {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw StructuralError(what);
}

// Relative slack used when comparing accumulated lengths.
constexpr double kLengthSlack = 1e-12;

}  // namespace

void DesignSpace::validate() const {
  require(std::isfinite(eps_lo) && std::isfinite(eps_hi), "permittivity bounds must be finite");
  require(eps_lo >= 1.0, "eps_lo must be >= 1");
  require(eps_lo <= eps_hi, "eps_lo must not exceed eps_hi");
  require(std::isfinite(eps_outer) && eps_outer >= 1.0, "eps_outer must be >= 1");
  require(std::isfinite(length) && length > 0.0, "cavity length must be positive");
  require(std::isfinite(c) && c > 0.0, "wave speed must be positive");
}

Cavity::Cavity(std::vector<Layer> layers, double eps_outer, double eps_lo, double eps_hi, double c)
    : layers_(std::move(layers)), eps_outer_(eps_outer), eps_lo_(eps_lo), eps_hi_(eps_hi), c_(c) {
  require(!layers_.empty(), "cavity needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& layer = layers_[i];
    if (!(std::isfinite(layer.thickness) && layer.thickness > 0.0)) {
      std::ostringstream msg;
      msg << "layer " << i << " has non-positive thickness " << layer.thickness;
      throw StructuralError(msg.str());
    }
    if (!(std::isfinite(layer.eps) && layer.eps >= 1.0)) {
      std::ostringstream msg;
      msg << "layer " << i << " has permittivity " << layer.eps << " < 1";
      throw StructuralError(msg.str());
    }
    length_ += layer.thickness;
  }
  DesignSpace{eps_lo_, eps_hi_, eps_outer_, length_, c_}.validate();
}

Cavity::Cavity(std::vector<Layer> layers, const DesignSpace& space)
    : Cavity(std::move(layers), space.eps_outer, space.eps_lo, space.eps_hi, space.c) {}

Cavity Cavity::homogeneous(double eps, const DesignSpace& space) {
  return Cavity({{space.length, eps}}, space);
}

DesignSpace Cavity::space() const { return {eps_lo_, eps_hi_, eps_outer_, length_, c_}; }

std::vector<double> Cavity::interfaces() const {
  std::vector<double> x{0.0};
  x.reserve(layers_.size() + 1);
  double s = 0.0;
  for (const auto& layer : layers_) {
    s += layer.thickness;
    x.push_back(s);
  }
  x.back() = length_;
  return x;
}

double Cavity::eps_at(double s) const {
  double end = 0.0;
  for (const auto& layer : layers_) {
    end += layer.thickness;
    if (s < end) return layer.eps;
  }
  return layers_.back().eps;
}

Cavity Cavity::with_layers(std::vector<Layer> layers) const {
  return Cavity(std::move(layers), eps_outer_, eps_lo_, eps_hi_, c_);
}

Cavity Cavity::merged() const {
  std::vector<Layer> out;
  for (const auto& layer : layers_) {
    if (!out.empty() && out.back().eps == layer.eps) {
      out.back().thickness += layer.thickness;
    } else {
      out.push_back(layer);
    }
  }
  return with_layers(std::move(out));
}

AdmissibilityReport validate_admissible(const Cavity& cavity) {
  AdmissibilityReport report;
  const auto& layers = cavity.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const double eps = layers[i].eps;
    if (eps < cavity.eps_lo() || eps > cavity.eps_hi()) {
      report.admissible = false;
      report.violations.push_back({i, eps});
    }
  }
  return report;
}

double admissible_frequency_bound(const DesignSpace& space) {
  space.validate();
  if (space.eps_outer > space.eps_lo) {
    throw BoundNotApplicable("frequency bound only covers eps_outer <= eps_lo");
  }
  if (!(space.eps_hi > space.eps_lo)) {
    throw BoundNotApplicable("frequency bound needs eps_lo < eps_hi");
  }
  const double ratio = std::sqrt(space.eps_hi / space.eps_lo);
  const double steps = std::ceil(1.0 / (ratio - 1.0) - 0.5);
  return std::numbers::pi * space.c / (space.length * std::sqrt(space.eps_hi)) * (0.5 + steps);
}

double admissible_frequency_bound(const Cavity& cavity) {
  return admissible_frequency_bound(cavity.space());
}

double homogeneous_decay_rate(double eps, const DesignSpace& space) {
  if (!(eps >= 1.0)) throw StructuralError("permittivity must be >= 1");
  if (eps == space.eps_outer) {
    throw NoEigenvalues("homogeneous cavity matched to its exterior has no QN eigenvalues");
  }
  const double root = std::sqrt(eps);
  const double outer = std::sqrt(space.eps_outer);
  // Roots of tan(-w sqrt(eps) l / c) = i sqrt(eps / eps_outer).
  return space.c / (2.0 * space.length * root) * std::log(std::abs((root + outer) / (root - outer)));
}

std::vector<Complex> homogeneous_eigenvalues(double eps, const DesignSpace& space, int n_first, int n_last) {
  const double beta = homogeneous_decay_rate(eps, space);
  const double spacing = std::numbers::pi * space.c / (space.length * std::sqrt(eps));
  const double offset = eps > space.eps_outer ? 0.5 : 0.0;
  std::vector<Complex> out;
  for (int n = n_first; n <= n_last; ++n) {
    out.emplace_back(spacing * (n + offset), -beta);
  }
  return out;
}

StepFunction::StepFunction(std::vector<Step> steps) : steps_(std::move(steps)) {
  require(!steps_.empty(), "step function needs at least one piece");
  for (const auto& step : steps_) {
    require(std::isfinite(step.length) && step.length > 0.0, "step lengths must be positive");
    require(std::isfinite(step.value), "step values must be finite");
    length_ += step.length;
  }
}

StepFunction StepFunction::constant(double length, double value) {
  return StepFunction({{length, value}});
}

StepFunction StepFunction::indicator(double length, double a, double b, double value) {
  require(0.0 <= a && a < b && b <= length, "indicator support must lie inside [0, length]");
  std::vector<Step> steps;
  if (a > 0.0) steps.push_back({a, 0.0});
  steps.push_back({b - a, value});
  if (b < length) steps.push_back({length - b, 0.0});
  return StepFunction(std::move(steps));
}

double StepFunction::value_at(double s) const {
  double end = 0.0;
  for (const auto& step : steps_) {
    end += step.length;
    if (s < end) return step.value;
  }
  return steps_.back().value;
}

std::vector<double> StepFunction::breakpoints() const {
  std::vector<double> x{0.0};
  double s = 0.0;
  for (const auto& step : steps_) {
    s += step.length;
    x.push_back(s);
  }
  return x;
}

std::vector<double> common_refinement(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> all;
  all.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(all));
  const double scale = std::max(all.empty() ? 1.0 : std::abs(all.back()), 1.0);
  std::vector<double> out;
  for (double x : all) {
    if (out.empty() || x - out.back() > kLengthSlack * scale) out.push_back(x);
  }
  return out;
}

Cavity perturbed(const Cavity& cavity, const StepFunction& h, double zeta) {
  if (std::abs(h.length() - cavity.length()) > kLengthSlack * 10.0 * cavity.length()) {
    throw StructuralError("direction length does not match cavity length");
  }
  auto knots = common_refinement(cavity.interfaces(), h.breakpoints());
  knots.back() = cavity.length();
  std::vector<Layer> layers;
  layers.reserve(knots.size());
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double mid = 0.5 * (knots[i] + knots[i + 1]);
    layers.push_back({knots[i + 1] - knots[i], cavity.eps_at(mid) + zeta * h.value_at(mid)});
  }
  return cavity.with_layers(std::move(layers));
}

}  // namespace qnm
