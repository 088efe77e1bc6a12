#pragma once

#include <filesystem>

#include <json.hpp>

#include "rkhs_motion/kernels.hpp"
#include "rkhs_motion/optimizer.hpp"

namespace rkhs {

// Keys: family, sigma, bspline_degree, bspline_knots, coupling (rows),
// derivative_order, and waypoints for the waypoint_grid family.
nlohmann::ordered_json kernel_spec_to_json(const KernelSpec& spec);
KernelSpec kernel_spec_from_json(const nlohmann::json& j);

// reduce: {type: max|quadrature|dense, nx, m, quad_n}
nlohmann::ordered_json reduce_to_json(const ReduceOp& reduce);
ReduceOp reduce_from_json(const nlohmann::json& j);

struct PlanConfig {
  KernelSpec kernel = KernelSpec::gaussian(0.35);
  OptimizerConfig optimizer;
};

// Keys: lambda, beta, eps, n_max, limit_check_samples, reduce, kernel.
// Unknown keys are errors; missing keys keep the values already in `base`.
PlanConfig plan_config_from_json(const nlohmann::json& j, PlanConfig base = {});
nlohmann::ordered_json plan_config_to_json(const PlanConfig& cfg);
nlohmann::json load_json_file(const std::filesystem::path& path);

}  // namespace rkhs
