#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "rkhs_motion/kernels.hpp"
#include "rkhs_motion/waypoint_metric.hpp"

namespace rkhs {

// A path through configuration space over normalized time [0, 1].
class Trajectory {
 public:
  virtual ~Trajectory() = default;
  virtual int dof() const = 0;
  virtual Eigen::VectorXd eval(double t) const = 0;
  virtual Eigen::VectorXd eval_derivative(double t, int order) const = 0;
};

inline constexpr std::size_t kDefaultMaxSupport = 512;
inline constexpr double kSupportMergeTolerance = 1e-12;

// xi(t) = line(t) + sum_i k(t_i, t) B a_i, line(t) = q_start + (q_goal - q_start) t.
// Immutable; every modification returns a new trajectory with canonical
// (strictly increasing, merged) support.
class KernelTrajectory final : public Trajectory {
 public:
  KernelTrajectory(KernelSpec spec, Eigen::VectorXd q_start, Eigen::VectorXd q_goal,
                   std::vector<double> support, Eigen::MatrixXd coeffs,
                   std::size_t max_support = kDefaultMaxSupport);

  int dof() const override { return static_cast<int>(q_start_.size()); }
  Eigen::VectorXd eval(double t) const override;
  Eigen::VectorXd eval_derivative(double t, int order) const override;

  // Kernel part only (deviation from the straight line), optionally differentiated.
  Eigen::VectorXd deviation(double t, int order = 0) const;
  Eigen::VectorXd line(double t) const;

  const KernelSpec& spec() const { return spec_; }
  const Eigen::VectorXd& q_start() const { return q_start_; }
  const Eigen::VectorXd& q_goal() const { return q_goal_; }
  const std::vector<double>& support() const { return support_; }
  const Eigen::MatrixXd& coeffs() const { return coeffs_; }
  std::size_t max_support() const { return max_support_; }

  // ||kernel part||_H^2 = a^T K(T, T) a.
  double norm2() const;

  KernelTrajectory with_terms(const std::vector<double>& times, const Eigen::MatrixXd& coeffs) const;
  KernelTrajectory scaled(double factor) const;

 private:
  Eigen::VectorXd kernel_sum(double t, int order) const;

  KernelSpec spec_;
  Eigen::VectorXd q_start_;
  Eigen::VectorXd q_goal_;
  std::vector<double> support_;
  Eigen::MatrixXd coeffs_;
  std::size_t max_support_;
  // B-spline kernels: sum_i phi^(j)(t_i) a_i^T, so evaluation costs one basis call.
  Eigen::MatrixXd feature_weights_;
};

KernelTrajectory init_straight_line(const Eigen::VectorXd& q_start, const Eigen::VectorXd& q_goal,
                                    const KernelSpec& spec,
                                    std::size_t max_support = kDefaultMaxSupport);

// Shared, cached acceleration metric for M waypoints.
std::shared_ptr<const WaypointMetric> acceleration_metric(int waypoints);

// M waypoints at uniform times (rows; endpoints included), linearly
// interpolated between grid nodes.
class WaypointTrajectory final : public Trajectory {
 public:
  explicit WaypointTrajectory(Eigen::MatrixXd waypoints);

  int dof() const override { return static_cast<int>(waypoints_.cols()); }
  Eigen::VectorXd eval(double t) const override;
  // Order 1 is the piecewise-constant slope; higher orders are unsupported.
  Eigen::VectorXd eval_derivative(double t, int order) const override;

  int size() const { return static_cast<int>(waypoints_.rows()); }
  const Eigen::MatrixXd& waypoints() const { return waypoints_; }
  const WaypointMetric& metric() const { return *metric_; }
  double time(int index) const { return static_cast<double>(index) / (size() - 1); }

  // 0.5 * sum_d x_d^T A x_d.
  double smoothness() const;

 private:
  Eigen::MatrixXd waypoints_;
  std::shared_ptr<const WaypointMetric> metric_;
};

WaypointTrajectory densify(const Trajectory& trajectory, int waypoints);

// CHOMP step: interior waypoints <- waypoints - (1/lambda) A^{-1} grad; endpoints fixed.
WaypointTrajectory waypoint_update(const WaypointTrajectory& trajectory,
                                   const Eigen::MatrixXd& euclid_grad, double lambda);

// Total variation of the finite-difference velocity profile of the densified path.
double velocity_total_variation(const WaypointTrajectory& trajectory);

}  // namespace rkhs
