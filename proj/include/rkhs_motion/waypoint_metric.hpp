#pragma once

#include <array>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace rkhs {

// Acceleration metric over M uniform waypoints on [0, 1]:
//   A = K^T K / (48 dt^3),  K the (M-2) x M second-difference operator,
// so 0.5 * x^T A x approximates integral of |x''|^2 dt / 96. The 1/48 puts the
// peak of diag(A_II^{-1}) at 1 (the continuum value is exactly 1/48 before
// scaling), matching k(t, t) = 1 of the RBF families so lambda and beta mean
// the same step size under every parameterization.
// Endpoints are clamped; the interior block A_II is positive definite.
inline constexpr double kMetricScale = 48.0;

class WaypointMetric {
 public:
  explicit WaypointMetric(int waypoints);

  int size() const { return size_; }
  double dt() const { return 1.0 / (size_ - 1); }
  const Eigen::MatrixXd& full() const { return full_; }
  const Eigen::MatrixXd& interior() const { return interior_; }
  const Eigen::MatrixXd& interior_inverse() const { return interior_inverse_; }
  Eigen::MatrixXd solve_interior(const Eigen::MatrixXd& rhs) const;

  // Interior hat-function weights at t: (interior index, weight) pairs for the
  // two grid nodes bracketing t. Index -1 marks a clamped endpoint. With
  // `derivative` the weights are d/dt of the hat functions.
  struct HatWeights {
    std::array<int, 2> index;
    std::array<double, 2> weight;
  };
  HatWeights hat(double t, bool derivative = false) const;

 private:
  int size_;
  Eigen::MatrixXd full_;
  Eigen::MatrixXd interior_;
  Eigen::MatrixXd interior_inverse_;
  Eigen::LLT<Eigen::MatrixXd> interior_llt_;
};

}  // namespace rkhs
