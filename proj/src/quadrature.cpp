#include "qnm/quadrature.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <vector>

namespace qnm {

namespace {

struct RuleStorage {
  std::vector<double> nodes;
  std::vector<double> weights;
};

RuleStorage build_rule(int n) {
  RuleStorage rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

Complex fixed_rule(const std::function<Complex(double)>& f, double a, double b, const GaussRule& rule) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  Complex sum{0.0, 0.0};
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * sum;
}

Complex adapt(const std::function<Complex(double)>& f, double a, double b, Complex whole, double tol, int depth,
              const GaussRule& rule) {
  const double mid = 0.5 * (a + b);
  const Complex left = fixed_rule(f, a, mid, rule);
  const Complex right = fixed_rule(f, mid, b, rule);
  const Complex split = left + right;
  if (depth <= 0 || std::abs(split - whole) <= tol) return split;
  return adapt(f, a, mid, left, 0.5 * tol, depth - 1, rule) + adapt(f, mid, b, right, 0.5 * tol, depth - 1, rule);
}

}  // namespace

GaussRule gauss_legendre(int n) {
  static std::array<RuleStorage, 65> cache;
  static std::array<std::once_flag, 65> flags;
  if (n < 2 || n > 64) throw PreconditionError("Gauss-Legendre order must be in [2, 64]");
  std::call_once(flags[n], [n] { cache[n] = build_rule(n); });
  return {cache[n].nodes, cache[n].weights};
}

Complex integrate_adaptive(const std::function<Complex(double)>& f, double a, double b, double abs_tol,
                           int max_depth) {
  if (a == b) return {0.0, 0.0};
  const GaussRule rule = gauss_legendre(16);
  return adapt(f, a, b, fixed_rule(f, a, b, rule), abs_tol, max_depth, rule);
}

}  // namespace qnm
