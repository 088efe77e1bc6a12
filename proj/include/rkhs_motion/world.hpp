#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "rkhs_motion/arm.hpp"

namespace rkhs {

struct Circle {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 1.0;
};

inline constexpr double kDefaultEpsilon = 0.2;

struct Scene {
  std::vector<Circle> obstacles;
  double epsilon = kDefaultEpsilon;
  PlanarArm arm;
  Eigen::VectorXd q_start;
  Eigen::VectorXd q_goal;
  std::uint64_t seed = 0;

  // Throws ConfigError on invalid radii/epsilon or on endpoints that are
  // outside the joint limits or in collision.
  void validate() const;
};

// Signed distance to the nearest obstacle surface (negative inside);
// +infinity with no obstacles.
double distance(const Scene& scene, const Eigen::Vector2d& x);

// CHOMP hinge: -d + eps/2 inside, (d - eps)^2 / (2 eps) within the margin, 0 beyond.
double cost(const Scene& scene, const Eigen::Vector2d& x);
Eigen::Vector2d grad_cost(const Scene& scene, const Eigen::Vector2d& x);

// Minimum signed distance from any link segment of pose q to any obstacle.
double pose_clearance(const Scene& scene, const Eigen::VectorXd& q);

struct WorkspaceBox {
  Eigen::Vector2d lo{-2.0, -2.0};
  Eigen::Vector2d hi{2.0, 2.0};
};

struct SceneGenOptions {
  WorkspaceBox box;
  double radius_lo = 0.1;
  double radius_hi = 0.4;
  double epsilon = kDefaultEpsilon;
  int max_rejections = 10000;
};

// Deterministic in `seed`. Obstacles whose margin reaches the start or goal
// pose are rejected and resampled.
Scene generate_scene(std::uint64_t seed, int n_obstacles, const PlanarArm& arm,
                     const Eigen::VectorXd& q_start, const Eigen::VectorXd& q_goal,
                     const SceneGenOptions& options = {});

// The 3-link arm and endpoints shared by the benchmark scenes.
PlanarArm default_arm();
Eigen::VectorXd default_q_start();
Eigen::VectorXd default_q_goal();

nlohmann::ordered_json scene_to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& j);
std::string serialize_scene(const Scene& scene);
Scene load_scene(const std::filesystem::path& path);

}  // namespace rkhs
