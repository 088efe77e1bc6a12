#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace rkhs {

// A point on the arm: `fraction` of the way along link `link` (0-based).
struct BodyPoint {
  int link = 0;
  double fraction = 1.0;

  bool operator==(const BodyPoint&) const = default;
};

struct JointLimit {
  double lo = 0.0;
  double hi = 0.0;
};

struct LimitViolation {
  int joint = 0;
  // Positive past the upper bound, negative past the lower bound.
  double amount = 0.0;
};

// Planar revolute chain rooted at the origin; joint k sits at cumulative angle
// q_0 + ... + q_k.
class PlanarArm {
 public:
  PlanarArm(std::vector<double> link_lengths, std::vector<JointLimit> joint_limits,
            int body_points_per_link = 3);

  int dof() const { return static_cast<int>(link_lengths_.size()); }
  const std::vector<double>& link_lengths() const { return link_lengths_; }
  const std::vector<JointLimit>& joint_limits() const { return joint_limits_; }
  const std::vector<BodyPoint>& body_points() const { return body_points_; }
  int body_points_per_link() const { return body_points_per_link_; }
  double reach() const;

  Eigen::Vector2d fk(const Eigen::VectorXd& q, const BodyPoint& u) const;
  // 2 x D; columns distal to u's link are zero.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& q, const BodyPoint& u) const;
  // Origins of joints 0..D-1 followed by the end-effector position.
  std::vector<Eigen::Vector2d> joint_positions(const Eigen::VectorXd& q) const;

  std::vector<LimitViolation> limit_violations(const Eigen::VectorXd& q) const;

 private:
  void check(const Eigen::VectorXd& q, const BodyPoint& u) const;

  std::vector<double> link_lengths_;
  std::vector<JointLimit> joint_limits_;
  int body_points_per_link_;
  std::vector<BodyPoint> body_points_;
};

// Fractions used for k body points per link: 0.25 .. 1.0 evenly (k = 1 gives 1.0).
std::vector<double> body_point_fractions(int per_link);

}  // namespace rkhs
