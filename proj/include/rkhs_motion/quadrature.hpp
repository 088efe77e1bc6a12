#pragma once

#include <vector>

namespace rkhs {

// Gauss-Legendre rule mapped to [0, 1]: nodes ascending, weights sum to 1.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline constexpr int kMaxQuadratureNodes = 64;

// Roots of P_n by Newton iteration from the Chebyshev-like initial guesses
// cos(pi (i + 3/4) / (n + 1/2)); weights w_i = 2 / ((1 - x_i^2) P_n'(x_i)^2),
// halved by the map x -> (1 + x) / 2. Valid for 1 <= n <= 64.
QuadratureRule legendre_rule(int n);

// P_n(x) and P_n'(x) via the three-term recurrence.
struct LegendreValue {
  double value;
  double derivative;
};
LegendreValue legendre(int n, double x);

}  // namespace rkhs
