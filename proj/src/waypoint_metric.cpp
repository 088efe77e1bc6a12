#include "rkhs_motion/waypoint_metric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rkhs_motion/errors.hpp"

namespace rkhs {

WaypointMetric::WaypointMetric(int waypoints) : size_(waypoints) {
  if (waypoints < 3) throw std::invalid_argument("waypoint metric: need at least 3 waypoints");
  const int m = waypoints;
  Eigen::MatrixXd diff = Eigen::MatrixXd::Zero(m - 2, m);
  for (int r = 0; r < m - 2; ++r) {
    diff(r, r) = 1.0;
    diff(r, r + 1) = -2.0;
    diff(r, r + 2) = 1.0;
  }
  const double h = dt();
  full_ = diff.transpose() * diff / (kMetricScale * h * h * h);
  interior_ = full_.block(1, 1, m - 2, m - 2);
  interior_llt_.compute(interior_);
  if (interior_llt_.info() != Eigen::Success)
    throw FactorizationError("waypoint metric: interior block is not positive definite");
  interior_inverse_ = interior_llt_.solve(Eigen::MatrixXd::Identity(m - 2, m - 2));
  interior_inverse_ = 0.5 * (interior_inverse_ + interior_inverse_.transpose()).eval();
}

Eigen::MatrixXd WaypointMetric::solve_interior(const Eigen::MatrixXd& rhs) const {
  return interior_llt_.solve(rhs);
}

WaypointMetric::HatWeights WaypointMetric::hat(double t, bool derivative) const {
  const int cells = size_ - 1;
  const double x = t * cells;
  int cell = std::clamp(static_cast<int>(std::floor(x)), 0, cells - 1);
  const double s = x - cell;
  HatWeights w;
  // Grid node g maps to interior index g - 1; endpoints are clamped.
  auto interior_index = [&](int node) { return (node == 0 || node == cells) ? -1 : node - 1; };
  w.index = {interior_index(cell), interior_index(cell + 1)};
  if (derivative)
    w.weight = {-static_cast<double>(cells), static_cast<double>(cells)};
  else
    w.weight = {1.0 - s, s};
  return w;
}

}  // namespace rkhs
