#include <cmath>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "rkhs_motion/errors.hpp"
#include "rkhs_motion/optimizer.hpp"

using namespace rkhs;

namespace {

Scene fixture_scene() {
  // The straight line between the default endpoints clips the first circle.
  return Scene{{{{2.1, 2.05}, 0.2}, {{1.7, -0.6}, 0.25}, {{-0.8, 0.4}, 0.2}}, 0.2, default_arm(), default_q_start(), default_q_goal(), 0};
}

// One revolute link sweeping past a post; limits wide enough never to bind.
Scene one_link() {
  return Scene{{{{0.1, 1.0}, 0.25}, {{-0.7, -0.7}, 0.15}}, 0.2, PlanarArm({1.0}, {{-6.0, 6.0}}, 3),
               Eigen::VectorXd::Constant(1, 0.2), Eigen::VectorXd::Constant(1, 2.6), 0};
}

KernelTrajectory with_terms(const KernelSpec& spec, const Scene& s, std::vector<double> t, Eigen::MatrixXd a) {
  return KernelTrajectory(spec, s.q_start, s.q_goal, std::move(t), std::move(a));
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("endpoint multipliers solve the 2x2 kernel system") {
  const Scene s = fixture_scene();
  const KernelSpec spec = KernelSpec::gaussian(0.5);
  Eigen::MatrixXd a(2, 3);
  a << 0.4, -0.2, 0.1, 0.3, 0.5, -0.6;
  const auto cand = with_terms(spec, s, {0.1, 0.8}, a);
  const double lambda = 7.0;
  const auto m = solve_equality_multipliers(cand, lambda);
  Eigen::Matrix2d k;
  k << 1.0, std::exp(-2.0), std::exp(-2.0), 1.0;
  for (int d = 0; d < 3; ++d) {
    const Eigen::Vector2d r(cand.eval(0.0)(d) - s.q_start(d), cand.eval(1.0)(d) - s.q_goal(d));
    // Appended coefficients c = -gamma / lambda must cancel the residuals: K c = -r.
    const Eigen::Vector2d c = k.fullPivLu().solve(-r);
    CHECK(-m.start(d) / lambda == doctest::Approx(c(0)).epsilon(1e-12));
    CHECK(-m.goal(d) / lambda == doctest::Approx(c(1)).epsilon(1e-12));
  }
  const auto fixed = apply_equality_multipliers(cand, m, lambda);
  CHECK(endpoint_residual(fixed, s.q_start, s.q_goal) < 1e-14);
}

TEST_CASE("endpoint constraints need distinguishable endpoint sections") {
  const Scene s = fixture_scene();
  const auto cand = with_terms(KernelSpec::gaussian(1e8), s, {0.5}, Eigen::MatrixXd::Ones(1, 3));
  CHECK_THROWS_AS(solve_equality_multipliers(cand, 1.0), ConfigError);
}

TEST_CASE("step coefficients: shrink, append scaled gradient, restore endpoints") {
  const Scene s = fixture_scene();
  const KernelSpec spec = KernelSpec::gaussian(0.3);
  Eigen::MatrixXd a(2, 3);
  a << 0.2, -0.3, 0.1, -0.1, 0.2, 0.3;
  const auto xi = with_terms(spec, s, {0.3, 0.6}, a);
  OptimizerConfig cfg;
  cfg.lambda = 4.0;
  cfg.beta = 1.0;
  cfg.reduce = MaxViolation{4, 16};
  const SupportSet sup = select_support(xi, s, cfg.reduce);
  REQUIRE(!sup.empty());
  const auto next = step_with_support(xi, s, sup, cfg);
  CHECK(endpoint_residual(next, s.q_start, s.q_goal) < 1e-13);
  const Eigen::MatrixXd g = obstacle_gradient_rows(xi, s, sup);
  const auto& ts = next.support();
  for (std::size_t i = 0; i < sup.size(); ++i) {
    const auto it = std::find(ts.begin(), ts.end(), sup[i].t);
    REQUIRE(it != ts.end());
    CHECK((next.coeffs().row(it - ts.begin()) + g.row(i) / cfg.lambda).norm() < 1e-14);
  }
  const auto it = std::find(ts.begin(), ts.end(), 0.3);
  REQUIRE(it != ts.end());
  CHECK((next.coeffs().row(it - ts.begin()) - 0.75 * a.row(0)).norm() < 1e-15);
}

TEST_CASE("step minimizes the linearized regularized objective among feasible perturbations") {
  const Scene s = fixture_scene();
  const double sigma = 0.3;
  const KernelSpec spec = KernelSpec::gaussian(sigma);
  Eigen::MatrixXd a(2, 3);
  a << 0.2, -0.3, 0.1, -0.1, 0.2, 0.3;
  const auto xi = with_terms(spec, s, {0.3, 0.6}, a);
  OptimizerConfig cfg;
  cfg.lambda = 5.0;
  cfg.beta = 0.8;
  const SupportSet sup = select_support(xi, s, DensePathIntegral{40});
  const FunctionalGradient g = functional_gradient(xi, spec, s, sup);
  const auto next = step_with_support(xi, s, sup, cfg);

  // Deviations are represented as (times, coefficient rows) pairs.
  struct Dev {
    std::vector<double> t;
    Eigen::MatrixXd c;
  };
  const auto inner = [&](const Dev& x, const Dev& y) {
    double out = 0.0;
    for (std::size_t i = 0; i < x.t.size(); ++i)
      for (std::size_t j = 0; j < y.t.size(); ++j) out += oracle::gaussian(x.t[i], y.t[j], sigma) * x.c.row(i).dot(y.c.row(j));
    return out;
  };
  const Dev grad{g.times, g.coeffs};
  const Dev prev{xi.support(), xi.coeffs()};
  const auto objective = [&](const Dev& z) {
    // Obstacle term and norm term both linearized at the previous iterate.
    return inner(grad, z) + cfg.beta * inner(prev, z) +
           0.5 * cfg.lambda * (inner(z, z) - 2 * inner(z, prev) + inner(prev, prev));
  };
  const Dev best{next.support(), next.coeffs()};
  const double f0 = objective(best);

  std::mt19937_64 rng(21);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.05, 0.95);
  const double k01 = oracle::gaussian(0.0, 1.0, sigma);
  for (int trial = 0; trial < 50; ++trial) {
    // Random bump plus endpoint sections that cancel it at t = 0 and t = 1.
    const double tb = u(rng);
    const Eigen::RowVector3d v(n(rng), n(rng), n(rng));
    const double e0 = oracle::gaussian(tb, 0.0, sigma), e1 = oracle::gaussian(tb, 1.0, sigma);
    const double det = 1 - k01 * k01;
    const double c0 = (-e0 + k01 * e1) / det, c1 = (k01 * e0 - e1) / det;
    const double scale = 0.05 * u(rng);
    Dev z = best;
    z.t.insert(z.t.end(), {tb, 0.0, 1.0});
    z.c.conservativeResize(z.c.rows() + 3, 3);
    z.c.row(z.c.rows() - 3) = scale * v;
    z.c.row(z.c.rows() - 2) = scale * c0 * v;
    z.c.row(z.c.rows() - 1) = scale * c1 * v;
    CHECK(objective(z) >= f0 - 1e-12);
  }
}

TEST_CASE("small steps on a frozen support descend monotonically") {
  const Scene s = fixture_scene();
  const KernelSpec spec = KernelSpec::gaussian(0.3);
  OptimizerConfig cfg;
  cfg.lambda = 500.0;
  cfg.beta = 0.5;
  auto xi = init_straight_line(s.q_start, s.q_goal, spec);
  const SupportSet sup = select_support(xi, s, MaxViolation{4, 32});
  REQUIRE(!sup.empty());
  double prev = support_cost(xi, s, sup) + 0.5 * cfg.beta * xi.norm2();
  for (int k = 0; k < 25; ++k) {
    xi = step_with_support(xi, s, sup, cfg);
    const double u = support_cost(xi, s, sup) + 0.5 * cfg.beta * xi.norm2();
    CHECK(u <= prev + 1e-12);
    prev = u;
  }
}

TEST_CASE("joint-limit projection pins a single violated sample at the bound") {
  const Scene s = fixture_scene();
  const KernelSpec spec = KernelSpec::gaussian(0.3);
  OptimizerConfig cfg;
  cfg.limit_check_samples = 101;
  // Joint 1 runs from 1.5 to -1.5; grow a bump at t = 0.5 until exactly one
  // scanned sample crosses the 2.6 upper limit.
  const auto bumped = [&](double amp) {
    const auto c = with_terms(spec, s, {0.5}, (Eigen::MatrixXd(1, 3) << 0.0, amp, 0.0).finished());
    return apply_equality_multipliers(c, solve_equality_multipliers(c, 1.0), 1.0);
  };
  const auto violating = [&](const KernelTrajectory& xi) {
    int n = 0;
    for (int k = 0; k < 101; ++k) n += xi.eval(k / 100.0)(1) > 2.6 ? 1 : 0;
    return n;
  };
  double amp = 2.5;
  while (violating(bumped(amp)) == 0) amp += 1e-3;
  const auto xi = bumped(amp);
  REQUIRE(violating(xi) == 1);
  int pinned = 0;
  for (int k = 0; k < 101; ++k)
    if (xi.eval(k / 100.0)(1) > 2.6) pinned = k;

  const auto projected = project_joint_limits(xi, s.arm, cfg);
  CHECK(projected.eval(pinned / 100.0)(1) == doctest::Approx(2.6).epsilon(1e-12));
  CHECK(max_limit_violation(projected, s.arm, 101) <= 1e-9);
  CHECK(endpoint_residual(projected, s.q_start, s.q_goal) <= 1e-12);

  // A deep violation is still brought within the bound at every scanned sample.
  const auto deep = project_joint_limits(bumped(4.0), s.arm, cfg);
  CHECK(max_limit_violation(deep, s.arm, 101) <= 1e-9);
  CHECK(endpoint_residual(deep, s.q_start, s.q_goal) <= 1e-8);

  // Already-feasible trajectories pass through untouched.
  const auto feasible = with_terms(spec, s, {0.5}, Eigen::MatrixXd::Constant(1, 3, 0.1));
  const auto same = project_joint_limits(feasible, s.arm, cfg);
  CHECK(same.support() == feasible.support());
}

TEST_CASE("natural gradient recovers coefficients") {
  const std::vector<double> support = {0.05, 0.3, 0.55, 0.8};
  CHECK(natural_gradient_check(KernelSpec::gaussian(0.2), support, 3) < 1e-8);
  CHECK(natural_gradient_check(KernelSpec::bspline(8, 3), support, 2) < 1e-8);
  CHECK(natural_gradient_check(KernelSpec::laplacian(0.3), support, 2) < 1e-8);
}

TEST_CASE("optimize records a trace and keeps constraints") {
  const Scene s = fixture_scene();
  OptimizerConfig cfg = OptimizerConfig{}.fixed_iterations(8);
  cfg.lambda = 3.0;
  int observed = 0;
  const auto r = optimize(s, cfg, KernelSpec::gaussian(0.35), [&](int iter, const Trajectory& xi) {
    CHECK(iter == ++observed);
    CHECK(endpoint_residual(xi, s.q_start, s.q_goal) <= 1e-8);
    CHECK(max_limit_violation(xi, s.arm, 101) <= 1e-9);
  });
  CHECK(observed == 8);
  REQUIRE(r.trace.records.size() == 9);
  CHECK(r.trace.records.front().iter == 0);
  CHECK(r.trace.records.front().norm2 == 0.0);
  CHECK(r.trace.stop == StopReason::MaxIterations);
  for (const auto& rec : r.trace.records) CHECK(rec.u_total == doctest::Approx(rec.u_obs + 0.25 * rec.norm2));
}

TEST_CASE("optimize stops at once on an obstacle-free scene") {
  Scene s = fixture_scene();
  s.obstacles.clear();
  const auto r = optimize(s, OptimizerConfig{}, KernelSpec::gaussian(0.35));
  CHECK(r.trace.stop == StopReason::Converged);
  CHECK(r.trace.records.size() == 1);
  CHECK(r.trajectory.support().empty());
  const auto w = optimize_waypoints(s, OptimizerConfig{}, 20);
  CHECK(w.trace.stop == StopReason::Converged);
}

TEST_CASE("waypoint-grid kernel reproduces the waypoint optimizer") {
  const Scene s = one_link();
  s.validate();
  const int m = 8;
  OptimizerConfig cfg = OptimizerConfig{}.fixed_iterations(10);
  cfg.lambda = 2.0;
  cfg.beta = 0.5;
  cfg.reduce = MaxViolation{4, 16};
  std::vector<Eigen::MatrixXd> kernel_iterates, waypoint_iterates;
  const auto grid = [&](const Trajectory& xi) {
    Eigen::MatrixXd out(m, 1);
    for (int k = 0; k < m; ++k) out(k, 0) = xi.eval(static_cast<double>(k) / (m - 1))(0);
    return out;
  };
  optimize(s, cfg, KernelSpec::waypoint_grid(m), [&](int, const Trajectory& xi) { kernel_iterates.push_back(grid(xi)); });
  optimize_waypoints(s, cfg, m, [&](int, const Trajectory& xi) { waypoint_iterates.push_back(grid(xi)); });
  REQUIRE(kernel_iterates.size() == 10);
  REQUIRE(waypoint_iterates.size() == 10);
  double moved = 0.0;
  for (int k = 0; k < 10; ++k) {
    CHECK((kernel_iterates[k] - waypoint_iterates[k]).cwiseAbs().maxCoeff() <= 1e-8);
    moved = std::max(moved, (waypoint_iterates[k] - grid(init_straight_line(s.q_start, s.q_goal, KernelSpec::waypoint_grid(m)))).cwiseAbs().maxCoeff());
  }
  CHECK(moved > 1e-3);
}

TEST_CASE("configuration validation") {
  OptimizerConfig cfg;
  cfg.lambda = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.beta = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.n_max = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.reduce = Quadrature{0};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  const auto fixed = OptimizerConfig{}.fixed_iterations(3);
  CHECK(fixed.n_max == 3);
  CHECK(fixed.stall_tolerance == 0.0);
}

}
