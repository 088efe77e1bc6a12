#include "rkhs_motion/checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rkhs_motion/optimizer.hpp"
#include "rkhs_motion/quadrature.hpp"

namespace rkhs {

namespace {

struct Rng {
  std::mt19937_64 gen;
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
  Eigen::VectorXd vec(int n, double lo, double hi) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = uniform(lo, hi);
    return v;
  }
};

KernelSpec pick_kernel(Rng& rng, int i) {
  switch (i % 3) {
    case 0: return KernelSpec::gaussian(rng.uniform(0.1, 0.5));
    case 1: return KernelSpec::laplacian(rng.uniform(0.1, 0.5));
    default: return KernelSpec::bspline(8, 3);
  }
}

KernelTrajectory random_trajectory(Rng& rng, const KernelSpec& spec, int dof, int terms) {
  std::vector<double> support;
  while (static_cast<int>(support.size()) < terms) {
    const double t = rng.uniform(0.0, 1.0);
    if (std::none_of(support.begin(), support.end(), [&](double s) { return std::abs(s - t) < 1e-3; }))
      support.push_back(t);
  }
  std::sort(support.begin(), support.end());
  Eigen::MatrixXd coeffs(terms, dof);
  for (int i = 0; i < terms; ++i) coeffs.row(i) = rng.vec(dof, -0.5, 0.5).transpose();
  return KernelTrajectory(spec, rng.vec(dof, -1, 1), rng.vec(dof, -1, 1), support, coeffs);
}

CheckResult reproducing_property(Rng& rng) {
  CheckResult r{"reproducing property", false, 0.0, 1e-10};
  for (int i = 0; i < 200; ++i) {
    const KernelSpec spec = pick_kernel(rng, i);
    const int dof = 1 + i % 3;
    const auto xi = random_trajectory(rng, spec, dof, 1 + i % 5);
    const double t = rng.uniform(0.0, 1.0);
    const Eigen::VectorXd y = rng.vec(dof, -1, 1);
    const double direct = y.dot(xi.deviation(t));
    const std::vector<double> probe{t};
    const double inner = rkhs_inner(spec, xi.support(), xi.coeffs(), probe, y.transpose());
    r.worst = std::max(r.worst, std::abs(direct - inner) / std::max(1.0, std::abs(direct)));
  }
  r.passed = r.worst <= r.tolerance;
  return r;
}

CheckResult cost_gradient(Rng& rng) {
  CheckResult r{"workspace cost gradient", false, 0.0, 1e-6};
  Scene scene{{{{2.1, 2.05}, 0.2}, {{1.7, -0.6}, 0.25}, {{-0.8, 0.4}, 0.2}}, 0.2, default_arm(), default_q_start(), default_q_goal(), 0};
  const double h = 1e-6;
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector2d x(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2));
    const double d = distance(scene, x);
    if (std::abs(d) < 1e-4 || std::abs(d - scene.epsilon) < 1e-4) continue;
    Eigen::Vector2d fd;
    for (int k = 0; k < 2; ++k) {
      Eigen::Vector2d e = Eigen::Vector2d::Zero();
      e(k) = h;
      fd(k) = (cost(scene, x + e) - cost(scene, x - e)) / (2 * h);
    }
    r.worst = std::max(r.worst, (fd - grad_cost(scene, x)).cwiseAbs().maxCoeff());
  }
  r.passed = r.worst <= r.tolerance;
  return r;
}

CheckResult arm_jacobian(Rng& rng) {
  CheckResult r{"arm jacobian", false, 0.0, 1e-6};
  const PlanarArm arm = default_arm();
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd q = rng.vec(arm.dof(), -2.5, 2.5);
    const BodyPoint u{i % arm.dof(), rng.uniform(0.0, 1.0)};
    const Eigen::MatrixXd jac = arm.jacobian(q, u);
    for (int k = 0; k < arm.dof(); ++k) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(arm.dof());
      e(k) = h;
      const Eigen::Vector2d fd = (arm.fk(q + e, u) - arm.fk(q - e, u)) / (2 * h);
      r.worst = std::max(r.worst, (fd - jac.col(k)).cwiseAbs().maxCoeff());
    }
  }
  r.passed = r.worst <= r.tolerance;
  return r;
}

CheckResult time_derivative(Rng& rng) {
  CheckResult r{"trajectory time derivative", false, 0.0, 1e-5};
  const double h = 1e-5;
  for (int i = 0; i < 100; ++i) {
    const KernelSpec spec = i % 2 ? KernelSpec::gaussian(rng.uniform(0.15, 0.5)) : KernelSpec::bspline(8, 3);
    const auto xi = random_trajectory(rng, spec, 2, 4);
    const double t = rng.uniform(0.05, 0.95);
    const Eigen::VectorXd fd = (xi.eval(t + h) - xi.eval(t - h)) / (2 * h);
    const Eigen::VectorXd an = xi.eval_derivative(t, 1);
    r.worst = std::max(r.worst, (fd - an).norm() / std::max(1.0, an.norm()));
  }
  r.passed = r.worst <= r.tolerance;
  return r;
}

CheckResult functional_gradient_fd(Rng& rng) {
  CheckResult r{"frozen-support functional gradient", false, 0.0, 1e-3};
  Scene scene = generate_scene(3, 6, default_arm(), default_q_start(), default_q_goal());
  const double h = 1e-5;
  int tested = 0;
  for (int i = 0; i < 200 && tested < 40; ++i) {
    const KernelSpec spec = KernelSpec::gaussian(rng.uniform(0.15, 0.4));
    const auto xi = random_trajectory(rng, spec, 3, 3);
    const SupportSet support = select_support(xi, scene, MaxViolation{});
    if (support.empty()) continue;
    const auto eta = random_trajectory(rng, spec, 3, 3);
    const auto grad = functional_gradient(xi, spec, scene, support);
    const double an = grad.inner(eta);
    const double fd = (support_cost(xi.with_terms(eta.support(), h * eta.coeffs()), scene, support) -
                       support_cost(xi.with_terms(eta.support(), -h * eta.coeffs()), scene, support)) /
                      (2 * h);
    if (std::abs(an) < 1e-6) continue;
    ++tested;
    r.worst = std::max(r.worst, std::abs(fd - an) / std::abs(an));
  }
  r.passed = tested > 0 && r.worst <= r.tolerance;
  return r;
}

CheckResult quadrature_exactness() {
  CheckResult r{"quadrature exactness", false, 0.0, 1e-12};
  for (int n = 1; n <= 20; ++n) {
    const QuadratureRule rule = legendre_rule(n);
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) sum += rule.weights[i] * std::pow(rule.nodes[i], p);
      r.worst = std::max(r.worst, std::abs(sum - 1.0 / (p + 1)));
    }
  }
  r.passed = r.worst <= r.tolerance;
  return r;
}

CheckResult constraints() {
  CheckResult r{"endpoint and joint-limit constraints", false, 0.0, 1e-8};
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Scene scene = generate_scene(seed, 12, default_arm(), default_q_start(), default_q_goal());
    OptimizerConfig cfg;
    cfg.lambda = 1.0;
    const auto res = optimize(scene, cfg.fixed_iterations(5), KernelSpec::gaussian(0.35));
    for (const auto& rec : res.trace.records) r.worst = std::max({r.worst, rec.endpoint_residual, rec.limit_violation});
  }
  r.passed = r.worst <= r.tolerance;
  return r;
}

CheckResult natural_gradient() {
  CheckResult r{"natural gradient identity", false, 0.0, 1e-8};
  r.worst = natural_gradient_check(KernelSpec::gaussian(0.3), {0.1, 0.4, 0.6, 0.9}, 2);
  r.passed = r.worst <= r.tolerance;
  return r;
}

}  // namespace

std::vector<CheckResult> run_checks(std::uint64_t seed) {
  Rng rng{std::mt19937_64(seed)};
  return {reproducing_property(rng), cost_gradient(rng), arm_jacobian(rng), time_derivative(rng),
          functional_gradient_fd(rng), quadrature_exactness(), constraints(), natural_gradient()};
}

}  // namespace rkhs
