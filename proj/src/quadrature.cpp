#include "rkhs_motion/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rkhs {

LegendreValue legendre(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  // (1 - x^2) P_n' = n (P_{n-1} - x P_n)
  const double dp = n * (p0 - x * p1) / (1.0 - x * x);
  return {p1, dp};
}

QuadratureRule legendre_rule(int n) {
  if (n < 1 || n > kMaxQuadratureNodes)
    throw std::invalid_argument("legendre_rule: n must be in [1, 64], got " + std::to_string(n));
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
      const auto p = legendre(n, x);
      const double dx = p.value / p.derivative;
      x -= dx;
      if (std::abs(dx) <= 1e-16) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      // Newton may stall one ulp away from the root; accept if the residual is tiny.
      if (std::abs(legendre(n, x).value) > 1e-13)
        throw std::runtime_error("legendre_rule: Newton iteration did not converge");
    }
    if (n % 2 == 1 && i == half - 1) x = 0.0;
    const double dp = legendre(n, x).derivative;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // x runs from near +1 down toward 0; place symmetric pairs on [0, 1].
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.weights[n - 1 - i] = 0.5 * w;
    rule.weights[i] = 0.5 * w;
  }
  return rule;
}

}  // namespace rkhs
