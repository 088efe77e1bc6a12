#include "rkhs_motion/bspline.hpp"

#include <algorithm>
#include <stdexcept>

namespace rkhs {

namespace {

double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

BSplineBasis::BSplineBasis(int knots, int degree) : degree_(degree) {
  if (knots < 2) throw std::invalid_argument("bspline: need at least 2 knots");
  if (degree < 0) throw std::invalid_argument("bspline: degree must be >= 0");
  knot_vector_.assign(degree + 1, 0.0);
  for (int k = 1; k + 1 < knots; ++k) knot_vector_.push_back(static_cast<double>(k) / (knots - 1));
  knot_vector_.insert(knot_vector_.end(), degree + 1, 1.0);
}

int BSplineBasis::span_index(double t) const {
  const int n = size();
  if (t >= 1.0) return n - 1;  // closed right end belongs to the last span
  auto it = std::upper_bound(knot_vector_.begin(), knot_vector_.end(), t);
  return static_cast<int>(it - knot_vector_.begin()) - 1;
}

Eigen::VectorXd BSplineBasis::eval(double t, int order) const {
  const int n = size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  if (order > degree_) return out;
  const int span = span_index(t);
  const auto& u = knot_vector_;
  const int m = static_cast<int>(u.size()) - 1;

  // table[q][i] = N_{i,q}(t) for every i where the function is defined.
  std::vector<std::vector<double>> table(degree_ + 1, std::vector<double>(m, 0.0));
  table[0][span] = 1.0;
  for (int q = 1; q <= degree_; ++q) {
    for (int i = 0; i + q < m; ++i) {
      const double left = safe_ratio(t - u[i], u[i + q] - u[i]) * table[q - 1][i];
      const double right =
          safe_ratio(u[i + q + 1] - t, u[i + q + 1] - u[i + 1]) * table[q - 1][i + 1];
      table[q][i] = left + right;
    }
  }

  // d^r N_{i,q} = q * (d^{r-1} N_{i,q-1} / (u_{i+q} - u_i)
  //                   - d^{r-1} N_{i+1,q-1} / (u_{i+q+1} - u_{i+1}))
  auto derivative = [&](auto&& self, int i, int q, int r) -> double {
    if (r == 0) return (i < m) ? table[q][i] : 0.0;
    const double a = safe_ratio(self(self, i, q - 1, r - 1), u[i + q] - u[i]);
    const double b = safe_ratio(self(self, i + 1, q - 1, r - 1), u[i + q + 1] - u[i + 1]);
    return q * (a - b);
  };
  for (int i = std::max(0, span - degree_); i <= std::min(n - 1, span); ++i)
    out(i) = derivative(derivative, i, degree_, order);
  return out;
}

}  // namespace rkhs
