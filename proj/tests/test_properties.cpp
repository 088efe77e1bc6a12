#include <cmath>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "rkhs_motion/optimizer.hpp"

using namespace rkhs;

// Randomized invariants over many draws.
TEST_SUITE("properties") {

TEST_CASE("gram matrices are symmetric positive definite") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& spec : {KernelSpec::gaussian(0.15), KernelSpec::laplacian(0.2), KernelSpec::bspline(10, 3),
                           KernelSpec::waypoint_grid(30)}) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> t;
      const int n = spec.finite_dimensional() ? 5 : 8;
      for (int i = 0; i < n; ++i) t.push_back(0.05 + 0.9 * (i + u(rng)) / n);
      const Eigen::MatrixXd k = cross_kernel(spec, t, t);
      CHECK((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
      CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(k).eigenvalues().minCoeff() > -1e-12);
    }
  }
}

TEST_CASE("reproducing property: <K(s,.)v, f>_H = v . f(s)") {
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n;
  for (const auto& spec : {KernelSpec::gaussian(0.2), KernelSpec::laplacian(0.3), KernelSpec::bspline(8, 3)}) {
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<double> ft = {u(rng), u(rng), u(rng)};
      Eigen::MatrixXd fc(3, 2);
      for (int i = 0; i < fc.size(); ++i) fc.data()[i] = n(rng);
      const KernelTrajectory f(spec, Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), ft, fc);
      const std::vector<double> s = {u(rng)};
      const Eigen::RowVector2d v(n(rng), n(rng));
      const double lhs = rkhs_inner(spec, s, v, f.support(), f.coeffs());
      CHECK(lhs == doctest::Approx(v.dot(f.eval(s[0]))).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("steps keep endpoints for every kernel family") {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 6; ++trial) {
    const Scene s = generate_scene(200 + trial, 10, default_arm(), default_q_start(), default_q_goal());
    for (const auto& spec : {KernelSpec::gaussian(0.3), KernelSpec::laplacian(0.3), KernelSpec::bspline(8, 3)}) {
      OptimizerConfig cfg = OptimizerConfig{}.fixed_iterations(4);
      cfg.lambda = 2.0 + trial;
      const auto r = optimize(s, cfg, spec);
      CHECK(endpoint_residual(r.trajectory, s.q_start, s.q_goal) <= 1e-8);
      CHECK(max_limit_violation(r.trajectory, s.arm, 101) <= 1e-9);
      for (const auto& rec : r.trace.records) CHECK(rec.endpoint_residual <= 1e-8);
    }
  }
}

TEST_CASE("merging support never changes the function") {
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n;
  const KernelSpec spec = KernelSpec::gaussian(0.25);
  for (int trial = 0; trial < 50; ++trial) {
    const double t0 = u(rng);
    Eigen::MatrixXd a(3, 1);
    a << n(rng), n(rng), n(rng);
    const auto split = KernelTrajectory(spec, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), {t0, t0, u(rng)}, a);
    CHECK(split.support().size() == 2);
    const double t = u(rng);
    const double expect = t + oracle::gaussian(t0, t, 0.25) * (a(0, 0) + a(1, 0)) +
                          oracle::gaussian(split.support()[0] == t0 ? split.support()[1] : split.support()[0], t, 0.25) * a(2, 0);
    CHECK(split.eval(t)(0) == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("dense cost is invariant to body point order and nonnegative") {
  for (int trial = 0; trial < 10; ++trial) {
    const Scene s = generate_scene(300 + trial, 12, default_arm(), default_q_start(), default_q_goal());
    const auto line = init_straight_line(s.q_start, s.q_goal, KernelSpec::gaussian(0.3));
    const double dense = u_obs(line, s, DensePathIntegral{200});
    CHECK(dense >= 0.0);
    CHECK(u_obs(line, s, MaxViolation{}) >= 0.0);
    CHECK(u_obs(line, s, Quadrature{10}) >= 0.0);
    if (min_clearance(line, s, 200) > s.epsilon) CHECK(dense == 0.0);
  }
}

}
