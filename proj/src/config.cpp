#include "rkhs_motion/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <string>

#include "rkhs_motion/errors.hpp"

namespace rkhs {

namespace {

void require_known_keys(const nlohmann::json& j, std::initializer_list<const char*> keys,
                        const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    const bool known = std::any_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; });
    if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

nlohmann::ordered_json kernel_spec_to_json(const KernelSpec& spec) {
  nlohmann::ordered_json j;
  j["family"] = std::string(to_string(spec.family()));
  j["sigma"] = spec.sigma();
  j["bspline_degree"] = spec.bspline_degree();
  j["bspline_knots"] = spec.bspline_knots();
  if (spec.family() == KernelFamily::WaypointGrid) j["waypoints"] = spec.grid_size();
  if (spec.has_coupling()) {
    const Eigen::MatrixXd& b = spec.coupling_matrix();
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < b.rows(); ++r) {
      std::vector<double> row(b.cols());
      for (Eigen::Index c = 0; c < b.cols(); ++c) row[c] = b(r, c);
      rows.push_back(row);
    }
    j["coupling"] = rows;
  }
  j["derivative_order"] = spec.derivative_order();
  return j;
}

KernelSpec kernel_spec_from_json(const nlohmann::json& j) {
  require_known_keys(j, {"family", "sigma", "bspline_degree", "bspline_knots", "coupling", "derivative_order", "waypoints"},
                     "kernel");
  try {
    const KernelFamily family = kernel_family_from_string(get_or<std::string>(j, "family", "gaussian"));
    KernelSpec spec = KernelSpec::gaussian(0.15);
    switch (family) {
      case KernelFamily::GaussianRbf: spec = KernelSpec::gaussian(get_or(j, "sigma", 0.15)); break;
      case KernelFamily::LaplacianRbf: spec = KernelSpec::laplacian(get_or(j, "sigma", 0.15)); break;
      case KernelFamily::BSpline:
        spec = KernelSpec::bspline(get_or(j, "bspline_knots", 8), get_or(j, "bspline_degree", 3));
        break;
      case KernelFamily::WaypointGrid: spec = KernelSpec::waypoint_grid(get_or(j, "waypoints", 100)); break;
    }
    if (j.contains("coupling")) {
      const auto rows = j.at("coupling").get<std::vector<std::vector<double>>>();
      Eigen::MatrixXd b(rows.size(), rows.size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.size()) throw ConfigError("kernel: coupling must be square");
        for (std::size_t c = 0; c < rows.size(); ++c) b(r, c) = rows[r][c];
      }
      spec = spec.with_coupling(std::move(b));
    }
    return spec.derivative(get_or(j, "derivative_order", 0));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("kernel: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("kernel: ") + e.what());
  } catch (const std::logic_error& e) {
    throw ConfigError(std::string("kernel: ") + e.what());
  }
}

nlohmann::ordered_json reduce_to_json(const ReduceOp& reduce) {
  nlohmann::ordered_json j;
  std::visit(
      [&](const auto& op) {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, MaxViolation>) {
          j["type"] = "max";
          j["nx"] = op.sections;
          j["m"] = op.samples;
        } else if constexpr (std::is_same_v<T, Quadrature>) {
          j["type"] = "quadrature";
          j["quad_n"] = op.nodes;
        } else {
          j["type"] = "dense";
          j["m"] = op.samples;
        }
      },
      reduce);
  return j;
}

ReduceOp reduce_from_json(const nlohmann::json& j) {
  require_known_keys(j, {"type", "nx", "m", "quad_n"}, "reduce");
  try {
    const std::string type = get_or<std::string>(j, "type", "max");
    if (type == "max") return MaxViolation{get_or(j, "nx", 4), get_or(j, "m", 32)};
    if (type == "quadrature") return Quadrature{get_or(j, "quad_n", 20)};
    if (type == "dense") return DensePathIntegral{get_or(j, "m", 2000)};
    throw ConfigError("reduce: unknown type '" + type + "' (valid: max, quadrature, dense)");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("reduce: ") + e.what());
  }
}

PlanConfig plan_config_from_json(const nlohmann::json& j, PlanConfig base) {
  require_known_keys(j, {"lambda", "beta", "eps", "n_max", "limit_check_samples", "reduce", "kernel"}, "config");
  try {
    auto& opt = base.optimizer;
    opt.lambda = get_or(j, "lambda", opt.lambda);
    opt.beta = get_or(j, "beta", opt.beta);
    opt.eps = get_or(j, "eps", opt.eps);
    opt.n_max = get_or(j, "n_max", opt.n_max);
    opt.limit_check_samples = get_or(j, "limit_check_samples", opt.limit_check_samples);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (j.contains("reduce")) {
    // Partial reduce blocks refine the current operator.
    nlohmann::json merged = reduce_to_json(base.optimizer.reduce);
    const nlohmann::json& over = j.at("reduce");
    require_known_keys(over, {"type", "nx", "m", "quad_n"}, "reduce");
    if (over.contains("type") && over.at("type") != merged.at("type")) merged = {{"type", over.at("type")}};
    merged.update(over);
    base.optimizer.reduce = reduce_from_json(merged);
  }
  if (j.contains("kernel")) {
    nlohmann::json merged = kernel_spec_to_json(base.kernel);
    merged.update(j.at("kernel"));
    base.kernel = kernel_spec_from_json(merged);
  }
  base.optimizer.validate();
  return base;
}

nlohmann::ordered_json plan_config_to_json(const PlanConfig& cfg) {
  nlohmann::ordered_json j;
  j["lambda"] = cfg.optimizer.lambda;
  j["beta"] = cfg.optimizer.beta;
  j["eps"] = cfg.optimizer.eps;
  j["n_max"] = cfg.optimizer.n_max;
  j["limit_check_samples"] = cfg.optimizer.limit_check_samples;
  j["reduce"] = reduce_to_json(cfg.optimizer.reduce);
  j["kernel"] = kernel_spec_to_json(cfg.kernel);
  return j;
}

nlohmann::json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("parse error in " + path.string() + ": " + e.what());
  }
}

}  // namespace rkhs
