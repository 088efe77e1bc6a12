#include "rkhs_motion/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include "rkhs_motion/errors.hpp"

namespace rkhs {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Kernel sections whose diagonal vanishes (clamped waypoint endpoints) cannot
// carry a correction; the constraint there holds by construction.
bool carries_correction(const KernelSpec& spec, double t) {
  return spec.eval(t, t) > 1e-14;
}

struct PointConstraint {
  double t;
  double target;
};

// Minimum-norm correction sum_p k(t_p, .) z_p (one joint) meeting
// value(t_p) + correction(t_p) = target. Returns z in constraint order.
Eigen::VectorXd solve_pointwise(const KernelSpec& spec, const std::vector<PointConstraint>& constraints,
                                const Eigen::VectorXd& current) {
  const auto n = static_cast<Eigen::Index>(constraints.size());
  Eigen::MatrixXd g(n, n);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = spec.eval(constraints[i].t, constraints[j].t);
    rhs(i) = constraints[i].target - current(i);
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
  if (ldlt.info() != Eigen::Success) throw FactorizationError("constraint solve: factorization failed");
  Eigen::VectorXd z = ldlt.solve(rhs);
  if (!z.allFinite()) throw FactorizationError("constraint solve: singular constraint system");
  return z;
}

struct ActiveLimit {
  double t;
  int joint;
  double bound;
  int sign;
};

KernelTrajectory enforce_constraints(const KernelTrajectory& xi, const std::vector<ActiveLimit>& active) {
  const KernelSpec& spec = xi.spec();
  const int dof = xi.dof();
  // Constraint times per joint: endpoints first, then active limit samples.
  std::vector<std::vector<PointConstraint>> per_joint(dof);
  for (int d = 0; d < dof; ++d) {
    if (carries_correction(spec, 0.0)) per_joint[d].push_back({0.0, xi.q_start()(d)});
    if (carries_correction(spec, 1.0)) per_joint[d].push_back({1.0, xi.q_goal()(d)});
  }
  for (const auto& a : active) per_joint[a.joint].push_back({a.t, a.bound});

  std::map<double, Eigen::VectorXd> z_at;
  std::map<double, Eigen::VectorXd> value_at;
  for (int d = 0; d < dof; ++d)
    for (const auto& c : per_joint[d])
      if (!value_at.count(c.t)) value_at[c.t] = xi.eval(c.t);
  for (int d = 0; d < dof; ++d) {
    if (per_joint[d].empty()) continue;
    Eigen::VectorXd current(per_joint[d].size());
    for (std::size_t i = 0; i < per_joint[d].size(); ++i) current(i) = value_at[per_joint[d][i].t](d);
    const Eigen::VectorXd z = solve_pointwise(spec, per_joint[d], current);
    for (std::size_t i = 0; i < per_joint[d].size(); ++i) {
      auto& slot = z_at[per_joint[d][i].t];
      if (slot.size() == 0) slot = Eigen::VectorXd::Zero(dof);
      slot(d) += z(i);
    }
  }
  if (z_at.empty()) return xi;
  std::vector<double> times;
  Eigen::MatrixXd coeffs(static_cast<Eigen::Index>(z_at.size()), dof);
  for (const auto& [t, z] : z_at) {
    coeffs.row(static_cast<Eigen::Index>(times.size())) = spec.solve_coupling(z).transpose();
    times.push_back(t);
  }
  return xi.with_terms(times, coeffs);
}

double norm2_waypoints(const WaypointTrajectory& w, const Eigen::MatrixXd& line) {
  const Eigen::MatrixXd dev = w.waypoints() - line;
  return (dev.transpose() * w.metric().full() * dev).trace();
}

Eigen::MatrixXd line_samples(const Eigen::VectorXd& q_start, const Eigen::VectorXd& q_goal, int m) {
  Eigen::MatrixXd out(m, q_start.size());
  for (int k = 0; k < m; ++k) {
    const double t = static_cast<double>(k) / (m - 1);
    out.row(k) = (q_start + (q_goal - q_start) * t).transpose();
  }
  return out;
}

// Shared termination logic plus the stall criterion.
bool should_stop(const OptimizerConfig& cfg, const IterationTrace& trace, StopReason& reason) {
  const auto& last = trace.records.back();
  if (last.u_total <= cfg.eps) {
    reason = StopReason::Converged;
    return true;
  }
  if (last.iter >= cfg.n_max) {
    reason = StopReason::MaxIterations;
    return true;
  }
  if (cfg.stall_tolerance > 0.0 && trace.records.size() >= 2) {
    const double prev = trace.records[trace.records.size() - 2].u_total;
    if (prev > 0.0 && std::abs(last.u_total - prev) / prev < cfg.stall_tolerance) {
      reason = StopReason::Stalled;
      return true;
    }
  }
  return false;
}

}  // namespace

void OptimizerConfig::validate() const {
  if (!(lambda > 0.0)) throw ConfigError("optimizer: lambda must be > 0");
  if (!(beta >= 0.0)) throw ConfigError("optimizer: beta must be >= 0");
  if (n_max < 1) throw ConfigError("optimizer: n_max must be >= 1");
  if (limit_check_samples < 2) throw ConfigError("optimizer: limit_check_samples must be >= 2");
  try {
    rkhs::validate(reduce);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("optimizer: ") + e.what());
  }
}

OptimizerConfig OptimizerConfig::fixed_iterations(int iterations) const {
  OptimizerConfig out = *this;
  out.n_max = iterations;
  out.eps = -std::numeric_limits<double>::infinity();
  out.stall_tolerance = 0.0;
  return out;
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Converged: return "converged";
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::Stalled: return "stalled";
  }
  return "unknown";
}

EndpointMultipliers solve_equality_multipliers(const KernelTrajectory& candidate, double lambda) {
  const KernelSpec& spec = candidate.spec();
  const int dof = candidate.dof();
  EndpointMultipliers out{Eigen::VectorXd::Zero(dof), Eigen::VectorXd::Zero(dof)};
  const bool at_start = carries_correction(spec, 0.0);
  const bool at_goal = carries_correction(spec, 1.0);
  if (!at_start && !at_goal) return out;

  // Residuals of the kernel part; the line meets both endpoints exactly.
  const Eigen::VectorXd r0 = candidate.eval(0.0) - candidate.q_start();
  const Eigen::VectorXd r1 = candidate.eval(1.0) - candidate.q_goal();
  const double k00 = spec.eval(0.0, 0.0);
  const double k01 = spec.eval(0.0, 1.0);
  const double k11 = spec.eval(1.0, 1.0);
  // With K = k B the 2D x 2D system is the scalar 2 x 2 system per joint on
  // z = B c, where c = -gamma / lambda are the appended coefficients.
  Eigen::VectorXd z0(dof), z1(dof);
  if (at_start && at_goal) {
    const double det = k00 * k11 - k01 * k01;
    if (std::abs(det) <= 1e-12 * k00 * k11)
      throw ConfigError("equality multipliers: k(0,1) = +-1, kernel width too large for endpoint constraints");
    z0 = (-k11 * r0 + k01 * r1) / det;
    z1 = (k01 * r0 - k00 * r1) / det;
  } else if (at_start) {
    z0 = -r0 / k00;
    z1.setZero();
  } else {
    z0.setZero();
    z1 = -r1 / k11;
  }
  out.start = -lambda * spec.solve_coupling(z0);
  out.goal = -lambda * spec.solve_coupling(z1);
  return out;
}

KernelTrajectory apply_equality_multipliers(const KernelTrajectory& candidate,
                                            const EndpointMultipliers& multipliers, double lambda) {
  if (multipliers.start.isZero(0.0) && multipliers.goal.isZero(0.0)) return candidate;
  Eigen::MatrixXd coeffs(2, candidate.dof());
  coeffs.row(0) = -multipliers.start.transpose() / lambda;
  coeffs.row(1) = -multipliers.goal.transpose() / lambda;
  return candidate.with_terms({0.0, 1.0}, coeffs);
}

double endpoint_residual(const Trajectory& xi, const Eigen::VectorXd& q_start,
                         const Eigen::VectorXd& q_goal) {
  return std::max((xi.eval(0.0) - q_start).cwiseAbs().maxCoeff(),
                  (xi.eval(1.0) - q_goal).cwiseAbs().maxCoeff());
}

double max_limit_violation(const Trajectory& xi, const PlanarArm& arm, int samples) {
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const Eigen::VectorXd q = xi.eval(static_cast<double>(k) / (samples - 1));
    for (const auto& v : arm.limit_violations(q)) worst = std::max(worst, std::abs(v.amount));
  }
  return worst;
}

KernelTrajectory step_with_support(const KernelTrajectory& xi, const Scene& scene,
                                   const SupportSet& support, const OptimizerConfig& cfg) {
  const FunctionalGradient grad = functional_gradient(xi, xi.spec(), scene, support);
  const KernelTrajectory shrunk = xi.scaled(1.0 - cfg.beta / cfg.lambda);
  const KernelTrajectory candidate = shrunk.with_terms(grad.times, -grad.coeffs / cfg.lambda);
  return apply_equality_multipliers(candidate, solve_equality_multipliers(candidate, cfg.lambda),
                                    cfg.lambda);
}

StepResult step(const KernelTrajectory& xi, const Scene& scene, const OptimizerConfig& cfg) {
  cfg.validate();
  const auto start = Clock::now();
  SupportSet support = select_support(xi, scene, cfg.reduce);
  IterationRecord record;
  record.u_obs = support_cost(xi, scene, support);
  record.norm2 = xi.norm2();
  record.u_total = record.u_obs + 0.5 * cfg.beta * record.norm2;
  record.support_size = support.size();
  record.endpoint_residual = endpoint_residual(xi, xi.q_start(), xi.q_goal());
  record.limit_violation = max_limit_violation(xi, scene.arm, cfg.limit_check_samples);
  KernelTrajectory next = step_with_support(xi, scene, support, cfg);
  record.ms = elapsed_ms(start);
  return {std::move(next), std::move(support), record};
}

KernelTrajectory project_joint_limits(const KernelTrajectory& xi, const PlanarArm& arm,
                                      const OptimizerConfig& cfg) {
  const int samples = cfg.limit_check_samples;
  const int dof = xi.dof();
  constexpr double kActivation = 1e-10;
  constexpr int kMaxRounds = 32;
  constexpr double kPinSpacing = 0.05;
  std::vector<ActiveLimit> active;
  KernelTrajectory current = xi;
  for (int round = 0; round < kMaxRounds; ++round) {
    std::vector<Eigen::VectorXd> q(samples);
    for (int k = 0; k < samples; ++k) q[k] = current.eval(static_cast<double>(k) / (samples - 1));
    bool added = false;
    for (int d = 0; d < dof; ++d) {
      const auto& lim = arm.joint_limits()[d];
      // Worst sample of every contiguous violating run becomes active.
      int run_best = -1;
      double run_amount = 0.0;
      int run_sign = 0;
      auto flush = [&] {
        if (run_best < 0) return;
        const double t = static_cast<double>(run_best) / (samples - 1);
        // A violation next to an existing pin means the pinned bump is too
        // narrow; pushing that pin deeper keeps the constraint Gram well
        // conditioned where adding a neighbour would not.
        auto near = std::find_if(active.begin(), active.end(), [&](const ActiveLimit& a) {
          return a.joint == d && a.sign == run_sign && std::abs(a.t - t) < kPinSpacing;
        });
        if (near != active.end()) {
          near->bound -= run_sign * 2.0 * run_amount;
        } else {
          active.push_back({t, d, run_sign > 0 ? lim.hi : lim.lo, run_sign});
        }
        added = true;
        run_best = -1;
        run_amount = 0.0;
        run_sign = 0;
      };
      for (int k = 0; k < samples; ++k) {
        const double v = q[k](d) > lim.hi + kActivation ? q[k](d) - lim.hi
                         : q[k](d) < lim.lo - kActivation ? q[k](d) - lim.lo
                                                          : 0.0;
        const int sign = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
        if (sign != run_sign) flush();
        if (sign != 0) {
          run_sign = sign;
          if (std::abs(v) > run_amount) {
            run_amount = std::abs(v);
            run_best = k;
          }
        }
      }
      flush();
    }
    if (!added) break;
    current = enforce_constraints(xi, active);
  }
  return current;
}

KernelResult optimize(const Scene& scene, const OptimizerConfig& cfg, const KernelSpec& spec,
                      const IterateObserver& observer) {
  cfg.validate();
  if (scene.q_start.size() != scene.arm.dof()) throw ConfigError("optimize: scene dimension mismatch");
  KernelTrajectory xi = init_straight_line(scene.q_start, scene.q_goal, spec, cfg.max_support);
  IterationTrace trace{cfg.lambda, cfg.beta, StopReason::MaxIterations, {}};
  double step_ms = 0.0;
  for (int n = 0;; ++n) {
    const auto start = Clock::now();
    const SupportSet support = select_support(xi, scene, cfg.reduce);
    IterationRecord record;
    record.iter = n;
    record.u_obs = support_cost(xi, scene, support);
    record.norm2 = xi.norm2();
    record.u_total = record.u_obs + 0.5 * cfg.beta * record.norm2;
    record.support_size = support.size();
    record.endpoint_residual = endpoint_residual(xi, scene.q_start, scene.q_goal);
    record.limit_violation = max_limit_violation(xi, scene.arm, cfg.limit_check_samples);
    record.ms = step_ms + elapsed_ms(start);
    trace.records.push_back(record);
    if (should_stop(cfg, trace, trace.stop)) break;

    const auto step_start = Clock::now();
    xi = project_joint_limits(step_with_support(xi, scene, support, cfg), scene.arm, cfg);
    step_ms = elapsed_ms(step_start);
    if (observer) observer(n + 1, xi);
  }
  return {std::move(xi), std::move(trace)};
}

WaypointResult optimize_waypoints(const Scene& scene, const OptimizerConfig& cfg, int waypoints,
                                  const IterateObserver& observer) {
  cfg.validate();
  if (waypoints < 3) throw ConfigError("optimize_waypoints: need at least 3 waypoints");
  const Eigen::MatrixXd line = line_samples(scene.q_start, scene.q_goal, waypoints);
  WaypointTrajectory xi(line);
  const auto& metric = xi.metric();
  IterationTrace trace{cfg.lambda, cfg.beta, StopReason::MaxIterations, {}};
  double step_ms = 0.0;
  for (int n = 0;; ++n) {
    const auto start = Clock::now();
    const SupportSet support = select_support(xi, scene, cfg.reduce);
    IterationRecord record;
    record.iter = n;
    record.u_obs = support_cost(xi, scene, support);
    record.norm2 = norm2_waypoints(xi, line);
    record.u_total = record.u_obs + 0.5 * cfg.beta * record.norm2;
    record.support_size = support.size();
    record.endpoint_residual = endpoint_residual(xi, scene.q_start, scene.q_goal);
    record.limit_violation = max_limit_violation(xi, scene.arm, cfg.limit_check_samples);
    record.ms = step_ms + elapsed_ms(start);
    trace.records.push_back(record);
    if (should_stop(cfg, trace, trace.stop)) break;

    const auto step_start = Clock::now();
    const Eigen::MatrixXd rows = obstacle_gradient_rows(xi, scene, support);
    Eigen::MatrixXd euclid = Eigen::MatrixXd::Zero(waypoints, xi.dof());
    for (std::size_t i = 0; i < support.size(); ++i) {
      const auto hat = metric.hat(support[i].t);
      for (int j = 0; j < 2; ++j)
        if (hat.index[j] >= 0) euclid.row(hat.index[j] + 1) += hat.weight[j] * rows.row(i);
    }
    euclid += cfg.beta * metric.full() * (xi.waypoints() - line);
    Eigen::MatrixXd next = waypoint_update(xi, euclid, cfg.lambda).waypoints();
    for (int k = 1; k + 1 < waypoints; ++k)
      for (int d = 0; d < xi.dof(); ++d) {
        const auto& lim = scene.arm.joint_limits()[d];
        next(k, d) = std::clamp(next(k, d), lim.lo, lim.hi);
      }
    xi = WaypointTrajectory(std::move(next));
    step_ms = elapsed_ms(step_start);
    if (observer) observer(n + 1, xi);
  }
  return {std::move(xi), std::move(trace)};
}

double natural_gradient_check(const KernelSpec& spec, const std::vector<double>& support, int dof,
                              std::uint64_t seed, int trials) {
  const GramMatrix g(spec, support, dof);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const auto n = static_cast<Eigen::Index>(support.size());
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(dof);
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    Eigen::MatrixXd coeffs(n, dof);
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) coeffs.data()[i] = normal(rng);
    // The gradient trajectory evaluated at the support is the Euclidean gradient.
    const KernelTrajectory field(spec, zero, zero, support, coeffs);
    Eigen::VectorXd euclid(n * dof);
    for (Eigen::Index i = 0; i < n; ++i) euclid.segment(i * dof, dof) = field.eval(support[i]);
    const Eigen::VectorXd natural = g.solve(euclid);
    for (Eigen::Index i = 0; i < n; ++i)
      worst = std::max(worst, (natural.segment(i * dof, dof) - coeffs.row(i).transpose()).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace rkhs
