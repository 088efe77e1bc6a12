#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rkhs_motion/kernels.hpp"
#include "rkhs_motion/objective.hpp"
#include "rkhs_motion/trajectory.hpp"
#include "rkhs_motion/world.hpp"

namespace rkhs {

struct OptimizerConfig {
  double lambda = 20.0;
  double beta = 0.5;
  // Stop once U = U_obs + beta/2 ||xi||_H^2 <= eps.
  double eps = 1e-4;
  int n_max = 100;
  ReduceOp reduce = MaxViolation{};
  int limit_check_samples = 101;
  // Relative |dU| / U below this stops a stalled run; <= 0 disables.
  double stall_tolerance = 1e-6;
  std::size_t max_support = kDefaultMaxSupport;

  void validate() const;
  // Runs exactly n_max steps (no convergence or stall stop).
  OptimizerConfig fixed_iterations(int iterations) const;
};

enum class StopReason { Converged, MaxIterations, Stalled };
std::string_view to_string(StopReason reason);

struct IterationRecord {
  int iter = 0;
  double u_obs = 0.0;
  double norm2 = 0.0;
  double u_total = 0.0;
  std::size_t support_size = 0;
  double endpoint_residual = 0.0;
  double limit_violation = 0.0;
  double ms = 0.0;
};

struct IterationTrace {
  double lambda = 0.0;
  double beta = 0.0;
  StopReason stop = StopReason::MaxIterations;
  std::vector<IterationRecord> records;
};

// Called with every new iterate (1-based) right after projection.
using IterateObserver = std::function<void(int, const Trajectory&)>;

// Lagrange multipliers for xi(0) = q_start and xi(1) = q_goal. The update adds
// -(1/lambda) (K(0, .) gamma_start + K(1, .) gamma_goal).
struct EndpointMultipliers {
  Eigen::VectorXd start;
  Eigen::VectorXd goal;
};

EndpointMultipliers solve_equality_multipliers(const KernelTrajectory& candidate, double lambda);
KernelTrajectory apply_equality_multipliers(const KernelTrajectory& candidate,
                                            const EndpointMultipliers& multipliers, double lambda);

// max_d |xi_d(0) - q_start_d| and |xi_d(1) - q_goal_d|.
double endpoint_residual(const Trajectory& xi, const Eigen::VectorXd& q_start,
                         const Eigen::VectorXd& q_goal);
// Largest joint-limit violation over `samples` uniform times (0 when feasible).
double max_limit_violation(const Trajectory& xi, const PlanarArm& arm, int samples);

// Closed-form regularized step for a fixed support set:
//   a <- (1 - beta/lambda) a,  append (t_j, -(1/lambda) dc_j),  restore endpoints.
KernelTrajectory step_with_support(const KernelTrajectory& xi, const Scene& scene,
                                   const SupportSet& support, const OptimizerConfig& cfg);

struct StepResult {
  KernelTrajectory next;
  SupportSet support;
  IterationRecord record;  // metrics of the input iterate
};

StepResult step(const KernelTrajectory& xi, const Scene& scene, const OptimizerConfig& cfg);

// Sampled active set: violated (time, joint) samples become equality
// constraints at the violated bound, solved jointly with the endpoints.
KernelTrajectory project_joint_limits(const KernelTrajectory& xi, const PlanarArm& arm,
                                      const OptimizerConfig& cfg);

struct KernelResult {
  KernelTrajectory trajectory;
  IterationTrace trace;
};

KernelResult optimize(const Scene& scene, const OptimizerConfig& cfg, const KernelSpec& spec,
                      const IterateObserver& observer = {});

struct WaypointResult {
  WaypointTrajectory trajectory;
  IterationTrace trace;
};

inline constexpr int kDefaultWaypoints = 100;

// CHOMP baseline under the same cost field and reduce operator. Support
// entries spread onto waypoints through the linear-interpolation weights
// (identity at waypoint times); joint limits are enforced by clamping.
WaypointResult optimize_waypoints(const Scene& scene, const OptimizerConfig& cfg,
                                  int waypoints = kDefaultWaypoints,
                                  const IterateObserver& observer = {});

// Checks on random coefficient stacks c that evaluating sum_i K(t_i, .) c_i at
// the support and applying K(T, T)^{-1} recovers c. Returns the max deviation.
double natural_gradient_check(const KernelSpec& spec, const std::vector<double>& support, int dof,
                              std::uint64_t seed = 1, int trials = 8);

}  // namespace rkhs
