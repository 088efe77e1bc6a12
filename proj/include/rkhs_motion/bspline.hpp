#pragma once

#include <vector>

#include <Eigen/Dense>

namespace rkhs {

// Clamped B-spline basis on uniform knots over [0, 1].
class BSplineBasis {
 public:
  // `knots` counts the distinct uniform knots including 0 and 1.
  BSplineBasis(int knots, int degree);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(knot_vector_.size()) - degree_ - 1; }

  // Values of the `order`-th derivative of every basis function at t.
  Eigen::VectorXd eval(double t, int order = 0) const;

 private:
  int span_index(double t) const;

  int degree_;
  std::vector<double> knot_vector_;
};

}  // namespace rkhs
