#include <cmath>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "rkhs_motion/bspline.hpp"
#include "rkhs_motion/errors.hpp"
#include "rkhs_motion/kernels.hpp"

using namespace rkhs;

TEST_SUITE("kernels") {

TEST_CASE("gaussian value and derivative kernel diagonal") {
  const KernelSpec k = KernelSpec::gaussian(0.5);
  CHECK(k.eval(0.0, 1.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(k.eval(0.3, 0.3) == 1.0);
  // d/dt d/dt' of exp(-(t-t')^2 / (2 sigma^2)) at t = t' is 1 / sigma^2.
  CHECK(k.derivative(1).eval(0.4, 0.4) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("gaussian partials match finite differences of the closed form") {
  const double sigma = 0.3;
  const KernelSpec k = KernelSpec::gaussian(sigma);
  const auto f = [&](double t, double s) { return oracle::gaussian(t, s, sigma); };
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (int trial = 0; trial < 20; ++trial) {
    const double t = u(rng), s = u(rng);
    for (int a = 0; a <= 2; ++a)
      for (int b = 0; b <= 2 - a; ++b) {
        // Nested central differences: O(h^2 / sigma^2) truncation per level.
        const double fd = oracle::mixed(f, t, s, a, b, 1e-3);
        CHECK(k.partial(t, s, a, b) == doctest::Approx(fd).epsilon(1e-4).scale(1.0));
      }
  }
}

TEST_CASE("second derivative kernel is the fourth mixed partial") {
  const double sigma = 0.4;
  const KernelSpec k2 = KernelSpec::gaussian(sigma).derivative(2);
  const auto f = [&](double t, double s) { return oracle::gaussian(t, s, sigma); };
  const double fd = oracle::mixed(f, 0.35, 0.6, 2, 2, 1e-2);
  CHECK(k2.eval(0.35, 0.6) == doctest::Approx(fd).epsilon(1e-3));
  CHECK(k2.base().family() == KernelFamily::GaussianRbf);
  CHECK(k2.base().derivative_order() == 0);
}

TEST_CASE("laplacian values and unsupported derivatives") {
  const KernelSpec k = KernelSpec::laplacian(0.25);
  CHECK(k.eval(0.2, 0.7) == doctest::Approx(oracle::laplacian(0.2, 0.7, 0.25)).epsilon(1e-15));
  CHECK_THROWS_AS(k.partial(0.2, 0.7, 1, 0), UnsupportedError);
  CHECK_THROWS_AS(k.derivative(1), UnsupportedError);
}

TEST_CASE("b-spline kernel is the feature inner product") {
  const int knots = 6, degree = 3;
  const KernelSpec k = KernelSpec::bspline(knots, degree);
  const auto kv = oracle::clamped_knots(knots, degree);
  const int n = static_cast<int>(kv.size()) - degree - 1;
  for (double t : {0.0, 0.13, 0.5, 0.77, 1.0})
    for (double s : {0.0, 0.4, 0.91, 1.0}) {
      double expect = 0.0;
      for (int i = 0; i < n; ++i) expect += oracle::bspline_basis(kv, i, degree, t) * oracle::bspline_basis(kv, i, degree, s);
      CHECK(k.eval(t, s) == doctest::Approx(expect).epsilon(1e-13));
    }
  CHECK(k.finite_dimensional());
}

TEST_CASE("b-spline basis forms a partition of unity with matching derivatives") {
  const BSplineBasis basis(8, 3);
  for (double t = 0.0; t <= 1.0; t += 0.05) {
    CHECK(basis.eval(t).sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(basis.eval(t, 1).sum()) < 1e-10);
  }
  const double t = 0.37, h = 1e-6;
  const Eigen::VectorXd fd = (basis.eval(t + h) - basis.eval(t - h)) / (2 * h);
  CHECK((fd - basis.eval(t, 1)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("waypoint grid kernel matches the inverse interior metric") {
  const int m = 7;
  const KernelSpec k = KernelSpec::waypoint_grid(m);
  const Eigen::MatrixXd a = oracle::acceleration_matrix(m);
  const Eigen::MatrixXd inv = a.block(1, 1, m - 2, m - 2).inverse();
  const auto hat = [&](double t) {
    Eigen::VectorXd h = Eigen::VectorXd::Zero(m);
    const double x = t * (m - 1);
    const int lo = std::min(static_cast<int>(std::floor(x)), m - 2);
    h(lo) = 1.0 - (x - lo);
    h(lo + 1) = x - lo;
    return Eigen::VectorXd(h.segment(1, m - 2));
  };
  for (double t : {0.0, 0.1, 1.0 / 6.0, 0.5, 0.93})
    for (double s : {0.05, 0.5, 2.0 / 3.0, 1.0})
      CHECK(k.eval(t, s) == doctest::Approx(hat(t).dot(inv * hat(s))).epsilon(1e-12).scale(1.0));
  CHECK(k.grid_size() == m);
}

TEST_CASE("separable matrix kernel and coupling validation") {
  Eigen::Matrix2d b;
  b << 2.0, 0.5, 0.5, 1.0;
  const KernelSpec k = KernelSpec::gaussian(0.3).with_coupling(b);
  const Eigen::MatrixXd m = k.eval_matrix(0.2, 0.5, 2);
  CHECK((m - oracle::gaussian(0.2, 0.5, 0.3) * b).cwiseAbs().maxCoeff() < 1e-15);
  const Eigen::Vector2d v(1.0, -2.0);
  CHECK((k.solve_coupling(k.apply_coupling(v)) - v).norm() < 1e-14);

  Eigen::Matrix2d asym;
  asym << 1.0, 0.2, 0.0, 1.0;
  CHECK_THROWS_AS(KernelSpec::gaussian(0.3).with_coupling(asym), std::invalid_argument);
  Eigen::Matrix2d indefinite;
  indefinite << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(KernelSpec::gaussian(0.3).with_coupling(indefinite), std::invalid_argument);
  CHECK(KernelSpec::gaussian(0.3).coupling(3).isIdentity());
}

TEST_CASE("times outside the unit interval are rejected") {
  const KernelSpec k = KernelSpec::gaussian(0.3);
  CHECK_THROWS_AS(k.eval(-0.01, 0.5), std::domain_error);
  CHECK_THROWS_AS(k.eval(0.5, 1.01), std::domain_error);
}

TEST_CASE("invalid parameters") {
  CHECK_THROWS_AS(KernelSpec::gaussian(0.0), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::laplacian(-1.0), std::invalid_argument);
  try {
    kernel_family_from_string("matern");
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    for (const char* name : {"gaussian", "laplacian", "bspline", "waypoint_grid"}) CHECK(msg.find(name) != std::string::npos);
  }
  for (auto f : {KernelFamily::GaussianRbf, KernelFamily::LaplacianRbf, KernelFamily::BSpline, KernelFamily::WaypointGrid})
    CHECK(kernel_family_from_string(to_string(f)) == f);
}

TEST_CASE("gram matrix is symmetric, solves, and rejects duplicates") {
  const KernelSpec k = KernelSpec::gaussian(0.2);
  const std::vector<double> support = {0.1, 0.35, 0.6, 0.9};
  const GramMatrix g = gram(k, support, 2);
  CHECK(g.values().rows() == 8);
  CHECK((g.values() - g.values().transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.values()(0, 2) == doctest::Approx(oracle::gaussian(0.1, 0.35, 0.2)));
  CHECK(g.values()(0, 3) == 0.0);
  Eigen::VectorXd rhs(8);
  rhs << 1, 2, 3, 4, 5, 6, 7, 8;
  CHECK((g.values() * g.solve(rhs) - rhs).norm() < 1e-10);
  CHECK(g.jitter() == 0.0);
  const std::vector<double> dup = {0.2, 0.2};
  CHECK_THROWS_AS(gram(k, dup, 1), std::invalid_argument);
}

TEST_CASE("rkhs inner product equals a^T K b") {
  const KernelSpec k = KernelSpec::laplacian(0.3);
  const std::vector<double> ta = {0.1, 0.5}, tb = {0.2, 0.8, 0.95};
  Eigen::MatrixXd a(2, 2), b(3, 2);
  a << 1, 2, -1, 0.5;
  b << 0.3, 0.1, 0.7, -0.2, -1.0, 0.4;
  double expect = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) expect += oracle::laplacian(ta[i], tb[j], 0.3) * a.row(i).dot(b.row(j));
  CHECK(rkhs_inner(k, ta, a, tb, b) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(rkhs_norm2(k, ta, a) == doctest::Approx(rkhs_inner(k, ta, a, ta, a)));
}

}
