#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "rkhs_motion/arm.hpp"

using namespace rkhs;

namespace {

PlanarArm three_link() {
  return PlanarArm({1.2, 0.9, 0.6}, {{-3.0, 3.0}, {-2.0, 2.0}, {-1.5, 1.5}}, 3);
}

}  // namespace

TEST_SUITE("arm") {

TEST_CASE("body point fractions") {
  CHECK(body_point_fractions(1) == std::vector<double>{1.0});
  const auto f = body_point_fractions(4);
  REQUIRE(f.size() == 4);
  CHECK(f[0] == 0.25);
  CHECK(f[1] == doctest::Approx(0.5));
  CHECK(f[3] == 1.0);
  CHECK_THROWS(body_point_fractions(0));
  CHECK(three_link().body_points().size() == 9);
}

TEST_CASE("forward kinematics matches direct trigonometry") {
  const PlanarArm arm = three_link();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.4, 1.4);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Vector3d q(u(rng), u(rng), u(rng));
    for (const auto& b : arm.body_points())
      CHECK((arm.fk(q, b) - oracle::fk(arm.link_lengths(), q, b.link, b.fraction)).norm() < 1e-14);
  }
  const Eigen::Vector3d zero = Eigen::Vector3d::Zero();
  CHECK((arm.fk(zero, {2, 1.0}) - Eigen::Vector2d(2.7, 0.0)).norm() < 1e-15);
  const Eigen::Vector3d bent(std::numbers::pi / 2, 0.0, 0.0);
  CHECK((arm.fk(bent, {0, 0.5}) - Eigen::Vector2d(0.0, 0.6)).norm() < 1e-15);
  CHECK(arm.reach() == doctest::Approx(2.7));
}

TEST_CASE("jacobian matches central differences and has zero distal columns") {
  const PlanarArm arm = three_link();
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.4, 1.4);
  const double h = 1e-6;
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Vector3d q(u(rng), u(rng), u(rng));
    for (const auto& b : arm.body_points()) {
      const Eigen::MatrixXd j = arm.jacobian(q, b);
      for (int k = 0; k < 3; ++k) {
        Eigen::Vector3d dq = Eigen::Vector3d::Zero();
        dq(k) = h;
        const Eigen::Vector2d fd = (arm.fk(q + dq, b) - arm.fk(q - dq, b)) / (2 * h);
        CHECK((j.col(k) - fd).norm() < 1e-8);
        if (k > b.link) CHECK(j.col(k).norm() == 0.0);
      }
    }
  }
}

TEST_CASE("joint positions chain the links") {
  const PlanarArm arm = three_link();
  const Eigen::Vector3d q(0.3, -0.5, 0.8);
  const auto p = arm.joint_positions(q);
  REQUIRE(p.size() == 4);
  CHECK(p[0].norm() == 0.0);
  for (int k = 0; k < 3; ++k) {
    CHECK((p[k + 1] - p[k]).norm() == doctest::Approx(arm.link_lengths()[k]));
    CHECK((p[k + 1] - arm.fk(q, {k, 1.0})).norm() < 1e-14);
  }
}

TEST_CASE("limit violations carry joint and signed amount") {
  const PlanarArm arm = three_link();
  CHECK(arm.limit_violations(Eigen::Vector3d(0.0, 0.0, 0.0)).empty());
  const auto v = arm.limit_violations(Eigen::Vector3d(-3.5, 0.0, 1.7));
  REQUIRE(v.size() == 2);
  CHECK(v[0].joint == 0);
  CHECK(v[0].amount == doctest::Approx(-0.5));
  CHECK(v[1].joint == 2);
  CHECK(v[1].amount == doctest::Approx(0.2));
}

TEST_CASE("malformed arms and inputs are rejected") {
  CHECK_THROWS(PlanarArm({1.0, -1.0}, {{-1, 1}, {-1, 1}}));
  CHECK_THROWS(PlanarArm({1.0, 1.0}, {{-1, 1}}));
  CHECK_THROWS(PlanarArm({1.0}, {{1, -1}}));
  const PlanarArm arm = three_link();
  CHECK_THROWS(arm.fk(Eigen::Vector2d(0, 0), {0, 1.0}));
  CHECK_THROWS(arm.fk(Eigen::Vector3d(0, 0, 0), {3, 1.0}));
}

}
