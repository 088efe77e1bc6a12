#include "rkhs_motion/trajectory.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "rkhs_motion/bspline.hpp"
#include "rkhs_motion/errors.hpp"

namespace rkhs {

namespace {

void check_time(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    std::ostringstream os;
    os << "trajectory: time " << t << " outside [0, 1]";
    throw std::domain_error(os.str());
  }
}

}  // namespace

KernelTrajectory::KernelTrajectory(KernelSpec spec, Eigen::VectorXd q_start, Eigen::VectorXd q_goal,
                                   std::vector<double> support, Eigen::MatrixXd coeffs,
                                   std::size_t max_support)
    : spec_(std::move(spec)),
      q_start_(std::move(q_start)),
      q_goal_(std::move(q_goal)),
      max_support_(max_support) {
  const Eigen::Index dof = q_start_.size();
  if (dof == 0 || q_goal_.size() != dof)
    throw std::invalid_argument("trajectory: start/goal dimension mismatch");
  if (coeffs.rows() != static_cast<Eigen::Index>(support.size()) ||
      (coeffs.rows() > 0 && coeffs.cols() != dof))
    throw std::invalid_argument("trajectory: coefficient matrix does not match support/dof");
  if (spec_.has_coupling()) spec_.coupling(static_cast<int>(dof));  // validates dimension
  for (double t : support) check_time(t);

  // Canonical form: strictly increasing times, duplicates merged by summing.
  std::vector<std::size_t> order(support.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return support[a] < support[b]; });
  std::vector<Eigen::VectorXd> rows;
  for (std::size_t idx : order) {
    if (!support_.empty() && support[idx] - support_.back() <= kSupportMergeTolerance) {
      rows.back() += coeffs.row(idx).transpose();
    } else {
      support_.push_back(support[idx]);
      rows.push_back(coeffs.row(idx).transpose());
    }
  }
  if (support_.size() > max_support_) {
    std::ostringstream os;
    os << "trajectory: support size " << support_.size() << " exceeds cap " << max_support_;
    throw std::length_error(os.str());
  }
  coeffs_.resize(static_cast<Eigen::Index>(rows.size()), dof);
  for (std::size_t i = 0; i < rows.size(); ++i) coeffs_.row(i) = rows[i].transpose();

  if (spec_.family() == KernelFamily::BSpline && !support_.empty()) {
    const BSplineBasis& basis = *spec_.bspline_basis();
    feature_weights_ = Eigen::MatrixXd::Zero(basis.size(), dof);
    for (std::size_t i = 0; i < support_.size(); ++i)
      feature_weights_ += basis.eval(support_[i], spec_.derivative_order()) * coeffs_.row(i);
  }
}

Eigen::VectorXd KernelTrajectory::kernel_sum(double t, int order) const {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dof());
  if (support_.empty()) return sum;
  if (feature_weights_.size() > 0) {
    return feature_weights_.transpose() * spec_.bspline_basis()->eval(t, spec_.derivative_order() + order);
  }
  for (std::size_t i = 0; i < support_.size(); ++i)
    sum += spec_.partial(support_[i], t, 0, order) * coeffs_.row(i).transpose();
  return sum;
}

Eigen::VectorXd KernelTrajectory::deviation(double t, int order) const {
  check_time(t);
  return spec_.apply_coupling(kernel_sum(t, order));
}

Eigen::VectorXd KernelTrajectory::line(double t) const { return q_start_ + (q_goal_ - q_start_) * t; }

Eigen::VectorXd KernelTrajectory::eval(double t) const { return line(t) + deviation(t, 0); }

Eigen::VectorXd KernelTrajectory::eval_derivative(double t, int order) const {
  if (order < 1 || order > 2) throw std::invalid_argument("eval_derivative: order must be 1 or 2");
  if (spec_.family() == KernelFamily::LaplacianRbf)
    throw UnsupportedError("eval_derivative: laplacian kernel trajectories are not differentiable");
  Eigen::VectorXd out = deviation(t, order);
  if (order == 1) out += q_goal_ - q_start_;
  return out;
}

double KernelTrajectory::norm2() const { return rkhs_norm2(spec_, support_, coeffs_); }

KernelTrajectory KernelTrajectory::with_terms(const std::vector<double>& times,
                                              const Eigen::MatrixXd& coeffs) const {
  if (coeffs.rows() != static_cast<Eigen::Index>(times.size()) ||
      (coeffs.rows() > 0 && coeffs.cols() != dof()))
    throw std::invalid_argument("with_terms: coefficient matrix does not match times/dof");
  std::vector<double> support = support_;
  support.insert(support.end(), times.begin(), times.end());
  Eigen::MatrixXd all(coeffs_.rows() + coeffs.rows(), dof());
  all << coeffs_, coeffs;
  return KernelTrajectory(spec_, q_start_, q_goal_, std::move(support), std::move(all), max_support_);
}

KernelTrajectory KernelTrajectory::scaled(double factor) const {
  return KernelTrajectory(spec_, q_start_, q_goal_, support_, coeffs_ * factor, max_support_);
}

KernelTrajectory init_straight_line(const Eigen::VectorXd& q_start, const Eigen::VectorXd& q_goal,
                                    const KernelSpec& spec, std::size_t max_support) {
  return KernelTrajectory(spec, q_start, q_goal, {}, Eigen::MatrixXd(0, q_start.size()), max_support);
}

std::shared_ptr<const WaypointMetric> acceleration_metric(int waypoints) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const WaypointMetric>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[waypoints];
  if (!slot) slot = std::make_shared<const WaypointMetric>(waypoints);
  return slot;
}

WaypointTrajectory::WaypointTrajectory(Eigen::MatrixXd waypoints)
    : waypoints_(std::move(waypoints)),
      metric_(acceleration_metric(static_cast<int>(waypoints_.rows()))) {}

Eigen::VectorXd WaypointTrajectory::eval(double t) const {
  check_time(t);
  const int cells = size() - 1;
  const double x = t * cells;
  const int cell = std::clamp(static_cast<int>(x), 0, cells - 1);
  const double s = x - cell;
  return ((1.0 - s) * waypoints_.row(cell) + s * waypoints_.row(cell + 1)).transpose();
}

Eigen::VectorXd WaypointTrajectory::eval_derivative(double t, int order) const {
  check_time(t);
  if (order != 1) throw UnsupportedError("waypoint trajectory: only first derivatives are defined");
  const int cells = size() - 1;
  const int cell = std::clamp(static_cast<int>(t * cells), 0, cells - 1);
  return ((waypoints_.row(cell + 1) - waypoints_.row(cell)) * cells).transpose();
}

double WaypointTrajectory::smoothness() const {
  return 0.5 * (waypoints_.transpose() * metric_->full() * waypoints_).trace();
}

WaypointTrajectory densify(const Trajectory& trajectory, int waypoints) {
  if (waypoints < 3) throw std::invalid_argument("densify: need at least 3 waypoints");
  Eigen::MatrixXd out(waypoints, trajectory.dof());
  for (int k = 0; k < waypoints; ++k)
    out.row(k) = trajectory.eval(static_cast<double>(k) / (waypoints - 1)).transpose();
  return WaypointTrajectory(std::move(out));
}

WaypointTrajectory waypoint_update(const WaypointTrajectory& trajectory,
                                   const Eigen::MatrixXd& euclid_grad, double lambda) {
  const int m = trajectory.size();
  if (euclid_grad.rows() != m || euclid_grad.cols() != trajectory.dof())
    throw std::invalid_argument("waypoint_update: gradient shape mismatch");
  if (!(lambda > 0.0)) throw std::invalid_argument("waypoint_update: lambda must be > 0");
  Eigen::MatrixXd next = trajectory.waypoints();
  next.middleRows(1, m - 2) -=
      trajectory.metric().solve_interior(euclid_grad.middleRows(1, m - 2)) / lambda;
  return WaypointTrajectory(std::move(next));
}

double velocity_total_variation(const WaypointTrajectory& trajectory) {
  const Eigen::MatrixXd& w = trajectory.waypoints();
  const double inv_dt = trajectory.size() - 1;
  const Eigen::MatrixXd velocity = (w.bottomRows(w.rows() - 1) - w.topRows(w.rows() - 1)) * inv_dt;
  if (velocity.rows() < 2) return 0.0;
  return (velocity.bottomRows(velocity.rows() - 1) - velocity.topRows(velocity.rows() - 1))
      .cwiseAbs()
      .sum();
}

}  // namespace rkhs
