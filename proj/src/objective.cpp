#include "rkhs_motion/objective.hpp"

#include <limits>
#include <stdexcept>

namespace rkhs {

namespace {

struct BestPoint {
  double cost = -1.0;
  BodyPoint u;
};

BestPoint max_body_point(const Scene& scene, const Eigen::VectorXd& q) {
  BestPoint best;
  for (const auto& u : scene.arm.body_points()) {
    const double c = cost(scene, scene.arm.fk(q, u));
    if (c > best.cost) best = {c, u};
  }
  return best;
}

SupportSet select_max(const Trajectory& xi, const Scene& scene, const MaxViolation& op) {
  SupportSet out;
  if (scene.obstacles.empty()) return out;
  for (int section = 0; section < op.sections; ++section) {
    SupportEntry best{0.0, {}, 1.0};
    double best_cost = 0.0;
    for (int m = 0; m < op.samples; ++m) {
      // Cell-centred samples: sections never share a time and endpoints are skipped.
      const double t = (section + (m + 0.5) / op.samples) / op.sections;
      const auto point = max_body_point(scene, xi.eval(t));
      if (point.cost > best_cost) {
        best_cost = point.cost;
        best = {t, point.u, 1.0};
      }
    }
    if (best_cost > 0.0) out.push_back(best);
  }
  return out;
}

SupportSet select_quadrature(const Trajectory& xi, const Scene& scene, const Quadrature& op) {
  const QuadratureRule rule = legendre_rule(op.nodes);
  SupportSet out;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double t = rule.nodes[i];
    const auto point = max_body_point(scene, xi.eval(t));
    const double arc = xi.eval_derivative(t, 1).norm();
    out.push_back({t, point.u, rule.weights[i] * arc});
  }
  return out;
}

SupportSet select_dense(const Trajectory& xi, const Scene& scene, const DensePathIntegral& op) {
  const int m = op.samples;
  std::vector<Eigen::VectorXd> q(m);
  for (int k = 0; k < m; ++k) q[k] = xi.eval(static_cast<double>(k) / (m - 1));
  // Trapezoid in arc length: each sample carries half of each adjacent chord.
  std::vector<double> weight(m, 0.0);
  for (int k = 0; k + 1 < m; ++k) {
    const double chord = (q[k + 1] - q[k]).norm();
    weight[k] += 0.5 * chord;
    weight[k + 1] += 0.5 * chord;
  }
  SupportSet out;
  for (int k = 0; k < m; ++k) {
    if (weight[k] <= 0.0) continue;
    const double t = static_cast<double>(k) / (m - 1);
    for (const auto& u : scene.arm.body_points()) out.push_back({t, u, weight[k]});
  }
  return out;
}

}  // namespace

void validate(const ReduceOp& reduce) {
  std::visit(
      [](const auto& op) {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, MaxViolation>) {
          if (op.sections < 1 || op.samples < 2)
            throw std::invalid_argument("reduce max: need nx >= 1 and m >= 2");
        } else if constexpr (std::is_same_v<T, Quadrature>) {
          if (op.nodes < 1 || op.nodes > kMaxQuadratureNodes)
            throw std::invalid_argument("reduce quadrature: need 1 <= quad_n <= 64");
        } else {
          if (op.samples < 2) throw std::invalid_argument("reduce dense: need m >= 2");
        }
      },
      reduce);
}

SupportSet select_support(const Trajectory& xi, const Scene& scene, const ReduceOp& reduce) {
  validate(reduce);
  return std::visit(
      [&](const auto& op) -> SupportSet {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, MaxViolation>)
          return select_max(xi, scene, op);
        else if constexpr (std::is_same_v<T, Quadrature>)
          return select_quadrature(xi, scene, op);
        else
          return select_dense(xi, scene, op);
      },
      reduce);
}

double support_cost(const Trajectory& xi, const Scene& scene, const SupportSet& support) {
  double total = 0.0;
  double last_t = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd q;
  for (const auto& e : support) {
    if (!(e.t == last_t)) {
      q = xi.eval(e.t);
      last_t = e.t;
    }
    total += e.weight * cost(scene, scene.arm.fk(q, e.u));
  }
  return total;
}

double u_obs(const Trajectory& xi, const Scene& scene, const ReduceOp& reduce) {
  if (scene.obstacles.empty()) return 0.0;
  return support_cost(xi, scene, select_support(xi, scene, reduce));
}

double min_clearance(const Trajectory& xi, const Scene& scene, int samples) {
  double best = std::numeric_limits<double>::infinity();
  if (scene.obstacles.empty()) return best;
  for (int k = 0; k < samples; ++k) {
    const Eigen::VectorXd q = xi.eval(static_cast<double>(k) / (samples - 1));
    for (const auto& u : scene.arm.body_points())
      best = std::min(best, distance(scene, scene.arm.fk(q, u)));
  }
  return best;
}

double FunctionalGradient::inner(const KernelTrajectory& eta) const {
  return rkhs_inner(spec, times, coeffs, eta.support(), eta.coeffs());
}

Eigen::MatrixXd obstacle_gradient_rows(const Trajectory& xi, const Scene& scene, const SupportSet& support) {
  if (xi.dof() != scene.arm.dof()) throw std::invalid_argument("functional_gradient: dimension mismatch");
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(support.size()), xi.dof());
  for (std::size_t i = 0; i < support.size(); ++i) {
    const auto& e = support[i];
    const Eigen::VectorXd q = xi.eval(e.t);
    const Eigen::Vector2d x = scene.arm.fk(q, e.u);
    rows.row(i) = e.weight * (scene.arm.jacobian(q, e.u).transpose() * grad_cost(scene, x)).transpose();
  }
  return rows;
}

FunctionalGradient functional_gradient(const Trajectory& xi, const KernelSpec& spec,
                                       const Scene& scene, const SupportSet& support) {
  FunctionalGradient grad{spec, {}, obstacle_gradient_rows(xi, scene, support)};
  grad.times.reserve(support.size());
  for (const auto& e : support) grad.times.push_back(e.t);
  return grad;
}

FunctionalGradient derivative_penalty_gradient(const Trajectory& xi, const KernelSpec& base,
                                               const Scene& scene, const SupportSet& support,
                                               int order) {
  return functional_gradient(xi, base.derivative(order), scene, support);
}

}  // namespace rkhs
