#include <cmath>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "rkhs_motion/errors.hpp"
#include "rkhs_motion/world.hpp"

using namespace rkhs;

namespace {

Scene fixture_scene() {
  // The straight line between the default endpoints clips the first circle.
  return Scene{{{{2.1, 2.05}, 0.2}, {{1.7, -0.6}, 0.25}, {{-0.8, 0.4}, 0.2}}, 0.2, default_arm(), default_q_start(), default_q_goal(), 0};
}

// Hinge written from its definition with d the distance to the nearest surface.
double hinge(double d, double eps) {
  if (d < 0) return -d + eps / 2;
  if (d <= eps) return (d - eps) * (d - eps) / (2 * eps);
  return 0.0;
}

}  // namespace

TEST_SUITE("world") {

TEST_CASE("signed distance and hinge cost") {
  const Scene s = fixture_scene();
  const Eigen::Vector2d p(2.1, 2.35);  // 0.1 outside the first circle
  CHECK(distance(s, p) == doctest::Approx(0.1));
  CHECK(cost(s, p) == doctest::Approx(hinge(0.1, 0.2)).epsilon(1e-14));
  CHECK(distance(s, Eigen::Vector2d(2.1, 2.05)) == doctest::Approx(-0.2));
  CHECK(cost(s, Eigen::Vector2d(2.1, 2.05)) == doctest::Approx(0.2 + 0.1));
  CHECK(cost(s, Eigen::Vector2d(3.0, -3.0)) == 0.0);
  const Scene empty{{}, 0.2, default_arm(), default_q_start(), default_q_goal(), 0};
  CHECK(std::isinf(distance(empty, Eigen::Vector2d(0, 0))));
  CHECK(cost(empty, Eigen::Vector2d(0, 0)) == 0.0);
}

TEST_CASE("hinge is continuous at the surface and at the margin") {
  const Scene s = fixture_scene();
  const Eigen::Vector2d dir(0.0, 1.0);
  const Circle& c = s.obstacles.front();
  for (double d : {0.0, 0.2}) {
    const double lo = cost(s, c.center + (c.radius + d - 1e-9) * dir);
    const double hi = cost(s, c.center + (c.radius + d + 1e-9) * dir);
    CHECK(std::abs(lo - hi) < 1e-8);
  }
}

TEST_CASE("cost gradient matches central differences off the kinks") {
  const Scene s = fixture_scene();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  const double h = 1e-7;
  int checked = 0;
  while (checked < 200) {
    const Eigen::Vector2d x(u(rng), u(rng));
    const double d = distance(s, x);
    if (std::abs(d) < 1e-4 || std::abs(d - s.epsilon) < 1e-4) continue;
    Eigen::Vector2d fd;
    for (int k = 0; k < 2; ++k) {
      Eigen::Vector2d e = Eigen::Vector2d::Zero();
      e(k) = h;
      fd(k) = (cost(s, x + e) - cost(s, x - e)) / (2 * h);
    }
    CHECK((grad_cost(s, x) - fd).norm() < 1e-6);
    ++checked;
  }
}

TEST_CASE("pose clearance uses link segments") {
  const Scene s = fixture_scene();
  const Eigen::Vector3d q(0.4, -0.3, 0.9);
  const auto joints = s.arm.joint_positions(q);
  double expect = INFINITY;
  for (const auto& c : s.obstacles)
    for (int k = 0; k < 3; ++k) expect = std::min(expect, oracle::point_segment_distance(c.center, joints[k], joints[k + 1]) - c.radius);
  CHECK(pose_clearance(s, q) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("scene generation is deterministic and keeps endpoints clear") {
  const Scene a = generate_scene(42, 12, default_arm(), default_q_start(), default_q_goal());
  const Scene b = generate_scene(42, 12, default_arm(), default_q_start(), default_q_goal());
  const Scene c = generate_scene(43, 12, default_arm(), default_q_start(), default_q_goal());
  CHECK(serialize_scene(a) == serialize_scene(b));
  CHECK(serialize_scene(a) != serialize_scene(c));
  REQUIRE(a.obstacles.size() == 12);
  for (const auto& o : a.obstacles) {
    CHECK(o.radius >= 0.1);
    CHECK(o.radius <= 0.4);
    CHECK(std::abs(o.center.x()) <= 2.0);
    CHECK(std::abs(o.center.y()) <= 2.0);
  }
  CHECK(pose_clearance(a, a.q_start) > a.epsilon);
  CHECK(pose_clearance(a, a.q_goal) > a.epsilon);
  CHECK(generate_scene(0, 0, default_arm(), default_q_start(), default_q_goal()).obstacles.empty());
}

TEST_CASE("scene generation gives up when nothing fits") {
  SceneGenOptions opts;
  opts.radius_lo = 5.0;
  opts.radius_hi = 6.0;
  opts.max_rejections = 50;
  CHECK_THROWS_AS(generate_scene(1, 1, default_arm(), default_q_start(), default_q_goal(), opts), GenerationError);
}

TEST_CASE("serialization round-trips bit-exactly") {
  const Scene a = generate_scene(9, 5, default_arm(), default_q_start(), default_q_goal());
  const Scene b = scene_from_json(nlohmann::json::parse(serialize_scene(a)));
  CHECK(serialize_scene(b) == serialize_scene(a));
  REQUIRE(b.obstacles.size() == a.obstacles.size());
  for (std::size_t i = 0; i < a.obstacles.size(); ++i) {
    CHECK(b.obstacles[i].center == a.obstacles[i].center);
    CHECK(b.obstacles[i].radius == a.obstacles[i].radius);
  }
  CHECK(b.q_start == a.q_start);
  CHECK(b.arm.link_lengths() == a.arm.link_lengths());
}

TEST_CASE("invalid scenes are rejected") {
  Scene s = fixture_scene();
  s.validate();
  s.epsilon = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = fixture_scene();
  s.obstacles.push_back({s.arm.fk(s.q_start, {2, 1.0}), 0.1});
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = fixture_scene();
  s.q_goal(1) = 3.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK_THROWS_AS(scene_from_json(nlohmann::json::parse(R"({"obstacles": 3})")), ConfigError);
}

}
