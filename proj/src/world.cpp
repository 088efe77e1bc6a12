#include "rkhs_motion/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "rkhs_motion/errors.hpp"

namespace rkhs {

namespace {

struct Nearest {
  int index = -1;
  double distance = std::numeric_limits<double>::infinity();
};

// First obstacle (index order) achieving the minimum signed distance.
Nearest nearest_obstacle(const Scene& scene, const Eigen::Vector2d& x) {
  Nearest best;
  for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
    const auto& c = scene.obstacles[i];
    const double d = (x - c.center).norm() - c.radius;
    if (d < best.distance) best = {static_cast<int>(i), d};
  }
  return best;
}

double segment_distance(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                        const Eigen::Vector2d& p) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  const double s = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + s * ab - p).norm();
}

// 53-bit uniform double in [0, 1); independent of the standard library's
// distribution implementations.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

void Scene::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("scene: epsilon must be > 0");
  for (const auto& c : obstacles)
    if (!(c.radius > 0.0)) throw ConfigError("scene: obstacle radius must be > 0");
  if (q_start.size() != arm.dof() || q_goal.size() != arm.dof())
    throw ConfigError("scene: q_start/q_goal dimension does not match the arm");
  for (const auto* q : {&q_start, &q_goal}) {
    if (!arm.limit_violations(*q).empty())
      throw ConfigError("scene: endpoint configuration outside joint limits");
    for (const auto& u : arm.body_points())
      if (!(distance(*this, arm.fk(*q, u)) > 0.0))
        throw ConfigError("scene: endpoint configuration is in collision");
  }
}

double distance(const Scene& scene, const Eigen::Vector2d& x) {
  return nearest_obstacle(scene, x).distance;
}

double cost(const Scene& scene, const Eigen::Vector2d& x) {
  const double d = distance(scene, x);
  const double eps = scene.epsilon;
  if (d < 0.0) return -d + 0.5 * eps;
  if (d <= eps) return 0.5 / eps * (d - eps) * (d - eps);
  return 0.0;
}

Eigen::Vector2d grad_cost(const Scene& scene, const Eigen::Vector2d& x) {
  const Nearest near = nearest_obstacle(scene, x);
  const double eps = scene.epsilon;
  if (near.index < 0 || near.distance > eps) return Eigen::Vector2d::Zero();
  const Eigen::Vector2d offset = x - scene.obstacles[near.index].center;
  const double r = offset.norm();
  const Eigen::Vector2d normal = r > 0.0 ? Eigen::Vector2d(offset / r) : Eigen::Vector2d::UnitX();
  if (near.distance <= 0.0) return -normal;
  return (near.distance - eps) / eps * normal;
}

double pose_clearance(const Scene& scene, const Eigen::VectorXd& q) {
  const auto joints = scene.arm.joint_positions(q);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : scene.obstacles)
    for (std::size_t k = 0; k + 1 < joints.size(); ++k)
      best = std::min(best, segment_distance(joints[k], joints[k + 1], c.center) - c.radius);
  return best;
}

Scene generate_scene(std::uint64_t seed, int n_obstacles, const PlanarArm& arm,
                     const Eigen::VectorXd& q_start, const Eigen::VectorXd& q_goal,
                     const SceneGenOptions& options) {
  if (n_obstacles < 0) throw std::invalid_argument("generate_scene: n_obstacles must be >= 0");
  Scene scene{{}, options.epsilon, arm, q_start, q_goal, seed};
  std::mt19937_64 rng(seed);
  int rejections = 0;
  const Eigen::Vector2d extent = options.box.hi - options.box.lo;
  while (static_cast<int>(scene.obstacles.size()) < n_obstacles) {
    Circle c;
    c.center = options.box.lo + Eigen::Vector2d(uniform01(rng) * extent.x(), uniform01(rng) * extent.y());
    c.radius = options.radius_lo + uniform01(rng) * (options.radius_hi - options.radius_lo);
    Scene probe{{c}, options.epsilon, arm, q_start, q_goal, seed};
    if (pose_clearance(probe, q_start) > options.epsilon && pose_clearance(probe, q_goal) > options.epsilon) {
      scene.obstacles.push_back(c);
      continue;
    }
    if (++rejections >= options.max_rejections) {
      std::ostringstream os;
      os << "generate_scene: gave up after " << rejections << " rejections (seed " << seed << ")";
      throw GenerationError(os.str());
    }
  }
  scene.validate();
  return scene;
}

PlanarArm default_arm() {
  const double pi = std::numbers::pi;
  return PlanarArm({1.0, 1.0, 1.0}, {{-pi, pi}, {-2.6, 2.6}, {-2.6, 2.6}}, 3);
}

Eigen::VectorXd default_q_start() { return Eigen::Vector3d(-0.3, 1.5, 1.0); }
Eigen::VectorXd default_q_goal() { return Eigen::Vector3d(1.5, -1.5, -1.0); }

nlohmann::ordered_json scene_to_json(const Scene& scene) {
  nlohmann::ordered_json j;
  j["seed"] = scene.seed;
  j["epsilon"] = scene.epsilon;
  j["obstacles"] = nlohmann::ordered_json::array();
  for (const auto& c : scene.obstacles)
    j["obstacles"].push_back({{"cx", c.center.x()}, {"cy", c.center.y()}, {"r", c.radius}});
  nlohmann::ordered_json arm;
  arm["links"] = scene.arm.link_lengths();
  arm["joint_limits"] = nlohmann::ordered_json::array();
  for (const auto& lim : scene.arm.joint_limits()) arm["joint_limits"].push_back({lim.lo, lim.hi});
  arm["body_points_per_link"] = scene.arm.body_points_per_link();
  j["arm"] = arm;
  j["q_start"] = to_std(scene.q_start);
  j["q_goal"] = to_std(scene.q_goal);
  return j;
}

Scene scene_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> kKeys = {"seed", "epsilon", "obstacles", "arm", "q_start", "q_goal"};
  try {
    for (const auto& [key, _] : j.items())
      if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end())
        throw ConfigError("scene: unknown key '" + key + "'");
    const auto& ja = j.at("arm");
    for (const auto& [key, _] : ja.items())
      if (key != "links" && key != "joint_limits" && key != "body_points_per_link")
        throw ConfigError("scene: unknown arm key '" + key + "'");
    std::vector<JointLimit> limits;
    for (const auto& lim : ja.at("joint_limits")) {
      if (lim.size() != 2) throw ConfigError("scene: joint limit must be [lo, hi]");
      limits.push_back({lim.at(0).get<double>(), lim.at(1).get<double>()});
    }
    PlanarArm arm(ja.at("links").get<std::vector<double>>(), std::move(limits),
                  ja.at("body_points_per_link").get<int>());
    Scene scene{{}, j.at("epsilon").get<double>(), std::move(arm),
                to_vector(j.at("q_start").get<std::vector<double>>()),
                to_vector(j.at("q_goal").get<std::vector<double>>()), j.at("seed").get<std::uint64_t>()};
    for (const auto& o : j.at("obstacles")) {
      for (const auto& [key, _] : o.items())
        if (key != "cx" && key != "cy" && key != "r") throw ConfigError("scene: unknown obstacle key '" + key + "'");
      scene.obstacles.push_back({{o.at("cx").get<double>(), o.at("cy").get<double>()}, o.at("r").get<double>()});
    }
    scene.validate();
    return scene;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
}

std::string serialize_scene(const Scene& scene) { return scene_to_json(scene).dump(2) + "\n"; }

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("scene: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("scene: parse error in " + path.string() + ": " + e.what());
  }
  return scene_from_json(j);
}

}  // namespace rkhs
