#include "rkhs_motion/arm.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rkhs {

std::vector<double> body_point_fractions(int per_link) {
  if (per_link < 1) throw std::invalid_argument("arm: body_points_per_link must be >= 1");
  if (per_link == 1) return {1.0};
  std::vector<double> out;
  for (int i = 0; i < per_link; ++i) out.push_back(0.25 + 0.75 * i / (per_link - 1));
  out.back() = 1.0;
  return out;
}

PlanarArm::PlanarArm(std::vector<double> link_lengths, std::vector<JointLimit> joint_limits,
                     int body_points_per_link)
    : link_lengths_(std::move(link_lengths)),
      joint_limits_(std::move(joint_limits)),
      body_points_per_link_(body_points_per_link) {
  if (link_lengths_.empty()) throw std::invalid_argument("arm: need at least one link");
  if (joint_limits_.size() != link_lengths_.size())
    throw std::invalid_argument("arm: one joint limit per link required");
  for (double l : link_lengths_)
    if (!(l > 0.0)) throw std::invalid_argument("arm: link lengths must be > 0");
  for (const auto& lim : joint_limits_)
    if (!(lim.lo < lim.hi)) throw std::invalid_argument("arm: joint limits need lo < hi");
  const auto fractions = body_point_fractions(body_points_per_link_);
  for (int link = 0; link < dof(); ++link)
    for (double f : fractions) body_points_.push_back({link, f});
}

double PlanarArm::reach() const {
  return std::accumulate(link_lengths_.begin(), link_lengths_.end(), 0.0);
}

void PlanarArm::check(const Eigen::VectorXd& q, const BodyPoint& u) const {
  if (q.size() != dof()) throw std::invalid_argument("arm: configuration dimension mismatch");
  if (u.link < 0 || u.link >= dof() || !(u.fraction >= 0.0 && u.fraction <= 1.0))
    throw std::invalid_argument("arm: invalid body point");
}

std::vector<Eigen::Vector2d> PlanarArm::joint_positions(const Eigen::VectorXd& q) const {
  if (q.size() != dof()) throw std::invalid_argument("arm: configuration dimension mismatch");
  std::vector<Eigen::Vector2d> out;
  out.reserve(dof() + 1);
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
  double angle = 0.0;
  out.push_back(p);
  for (int k = 0; k < dof(); ++k) {
    angle += q(k);
    p += link_lengths_[k] * Eigen::Vector2d(std::cos(angle), std::sin(angle));
    out.push_back(p);
  }
  return out;
}

Eigen::Vector2d PlanarArm::fk(const Eigen::VectorXd& q, const BodyPoint& u) const {
  check(q, u);
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
  double angle = 0.0;
  for (int k = 0; k <= u.link; ++k) {
    angle += q(k);
    const double len = (k == u.link) ? u.fraction * link_lengths_[k] : link_lengths_[k];
    p += len * Eigen::Vector2d(std::cos(angle), std::sin(angle));
  }
  return p;
}

Eigen::MatrixXd PlanarArm::jacobian(const Eigen::VectorXd& q, const BodyPoint& u) const {
  check(q, u);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2, dof());
  const Eigen::Vector2d point = fk(q, u);
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  double angle = 0.0;
  for (int k = 0; k <= u.link; ++k) {
    const Eigen::Vector2d r = point - origin;
    jac(0, k) = -r.y();
    jac(1, k) = r.x();
    angle += q(k);
    origin += link_lengths_[k] * Eigen::Vector2d(std::cos(angle), std::sin(angle));
  }
  return jac;
}

std::vector<LimitViolation> PlanarArm::limit_violations(const Eigen::VectorXd& q) const {
  if (q.size() != dof()) throw std::invalid_argument("arm: configuration dimension mismatch");
  std::vector<LimitViolation> out;
  for (int d = 0; d < dof(); ++d) {
    if (q(d) > joint_limits_[d].hi)
      out.push_back({d, q(d) - joint_limits_[d].hi});
    else if (q(d) < joint_limits_[d].lo)
      out.push_back({d, q(d) - joint_limits_[d].lo});
  }
  return out;
}

}  // namespace rkhs
