#pragma once

#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "rkhs_motion/arm.hpp"
#include "rkhs_motion/kernels.hpp"
#include "rkhs_motion/quadrature.hpp"
#include "rkhs_motion/trajectory.hpp"
#include "rkhs_motion/world.hpp"

namespace rkhs {

// Nx equal sections, M grid samples per section; one max-cost point per section.
struct MaxViolation {
  int sections = 4;
  int samples = 32;
};

// Gauss-Legendre nodes weighted by arc length, max-cost body point per node.
struct Quadrature {
  int nodes = 20;
};

// M uniform samples over all body points, trapezoidal in arc length.
struct DensePathIntegral {
  int samples = 2000;
};

using ReduceOp = std::variant<MaxViolation, Quadrature, DensePathIntegral>;

void validate(const ReduceOp& reduce);

struct SupportEntry {
  double t = 0.0;
  BodyPoint u;
  double weight = 1.0;
};

using SupportSet = std::vector<SupportEntry>;

SupportSet select_support(const Trajectory& xi, const Scene& scene, const ReduceOp& reduce);

// sum over entries of w * c(x(xi(t), u)), with the support held fixed.
double support_cost(const Trajectory& xi, const Scene& scene, const SupportSet& support);

double u_obs(const Trajectory& xi, const Scene& scene, const ReduceOp& reduce);

// Smallest signed distance of any body point to any obstacle over `samples`
// uniform times; > 0 means collision-free at the sampled resolution.
double min_clearance(const Trajectory& xi, const Scene& scene, int samples);

// Kernel expansion of the obstacle gradient: sum_i K(t_i, .) g_i.
struct FunctionalGradient {
  KernelSpec spec;
  std::vector<double> times;
  // N x D; row i is g_i = w_i J^T(t_i, u_i) grad c(x(xi(t_i), u_i)).
  Eigen::MatrixXd coeffs;

  // <grad, eta>_H for a kernel trajectory sharing this kernel.
  double inner(const KernelTrajectory& eta) const;
};

// Row i is w_i J^T(t_i, u_i) grad c(x(xi(t_i), u_i)).
Eigen::MatrixXd obstacle_gradient_rows(const Trajectory& xi, const Scene& scene, const SupportSet& support);

FunctionalGradient functional_gradient(const Trajectory& xi, const KernelSpec& spec,
                                       const Scene& scene, const SupportSet& support);

// Same coefficients attached to the order-j derivative kernel sections; j = 0
// reduces to functional_gradient.
FunctionalGradient derivative_penalty_gradient(const Trajectory& xi, const KernelSpec& base,
                                               const Scene& scene, const SupportSet& support,
                                               int order);

}  // namespace rkhs
