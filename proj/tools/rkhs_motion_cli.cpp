#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rkhs_motion/bench.hpp"
#include "rkhs_motion/checks.hpp"
#include "rkhs_motion/config.hpp"
#include "rkhs_motion/errors.hpp"
#include "rkhs_motion/io.hpp"
#include "rkhs_motion/quadrature.hpp"
#include "rkhs_motion/svg.hpp"

namespace fs = std::filesystem;
using namespace rkhs;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitCollision = 2;

struct PlanFlags {
  std::string scene;
  std::string out;
  std::string config;
  std::optional<std::string> kernel;
  std::optional<double> sigma;
  std::optional<double> lambda;
  std::optional<double> beta;
  std::optional<int> nx;
  std::optional<int> iters;
};

struct BenchFlags {
  std::string suite;
  int trials = 100;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 0;
  bool record_timing = false;
  std::string scene;
};

// flag > config file > built-in default
PlanConfig resolve_plan_config(const PlanFlags& f) {
  PlanConfig cfg;
  if (!f.config.empty()) cfg = plan_config_from_json(load_json_file(f.config), cfg);
  nlohmann::json kernel = kernel_spec_to_json(cfg.kernel);
  if (f.kernel) {
    const KernelFamily family = kernel_family_from_string(*f.kernel);
    kernel = {{"family", std::string(to_string(family))}};
    if (family == KernelFamily::GaussianRbf || family == KernelFamily::LaplacianRbf) kernel["sigma"] = cfg.kernel.sigma();
  }
  if (f.sigma) kernel["sigma"] = *f.sigma;
  cfg.kernel = kernel_spec_from_json(kernel);
  if (f.lambda) cfg.optimizer.lambda = *f.lambda;
  if (f.beta) cfg.optimizer.beta = *f.beta;
  if (f.nx) {
    MaxViolation max;
    if (const auto* current = std::get_if<MaxViolation>(&cfg.optimizer.reduce)) max = *current;
    max.sections = *f.nx;
    cfg.optimizer.reduce = max;
  }
  if (f.iters) cfg.optimizer.n_max = *f.iters;
  validate(cfg.optimizer.reduce);
  cfg.optimizer.validate();
  return cfg;
}

int run_plan(const PlanFlags& f) {
  const PlanConfig cfg = resolve_plan_config(f);
  const Scene scene = load_scene(f.scene);
  const KernelResult result = optimize(scene, cfg.optimizer, cfg.kernel);
  const double clearance = min_clearance(result.trajectory, scene, 1000);

  std::error_code ec;
  fs::create_directories(f.out, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + f.out + ": " + ec.message());
  nlohmann::ordered_json effective = plan_config_to_json(cfg);
  effective["scene"] = f.scene;
  AtomicFileSet files(f.out);
  files.add("trajectory.csv", trajectory_csv(result.trajectory, 201));
  files.add("support.csv", support_csv(result.trajectory));
  files.add("trace.csv", trace_csv(result.trace));
  files.add("plan.svg", scene_svg(scene, &result.trajectory));
  files.add("effective_config.json", effective.dump(2) + "\n");
  files.commit();

  const auto& last = result.trace.records.back();
  std::printf("iterations %d  stop %s  u_obs %.6g  min clearance %.6g\n", last.iter,
              std::string(to_string(result.trace.stop)).c_str(), last.u_obs, clearance);
  if (clearance > 0.0) return kExitOk;
  std::fprintf(stderr, "residual collision: min clearance %.6g\n", clearance);
  return kExitCollision;
}

int run_scene_gen(std::uint64_t seed, int obstacles, const std::string& out) {
  const Scene scene = generate_scene(seed, obstacles, default_arm(), default_q_start(), default_q_goal());
  write_file_atomic(out, serialize_scene(scene));
  return kExitOk;
}

nlohmann::ordered_json bench_config_json(const BenchFlags& f, const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["suite"] = f.suite;
  j["n_trials"] = cfg.n_trials;
  j["n_obstacles"] = cfg.n_obstacles;
  j["iterations"] = cfg.iterations;
  j["base_seed"] = cfg.base_seed;
  j["lambda"] = cfg.lambda;
  j["beta"] = cfg.beta;
  j["nx"] = cfg.nx;
  j["samples_per_section"] = cfg.samples_per_section;
  j["waypoints"] = cfg.waypoints;
  j["dense_samples"] = cfg.dense_samples;
  j["kernels"] = nlohmann::ordered_json::array();
  for (const auto& k : cfg.kernels) j["kernels"].push_back(kernel_spec_to_json(k));
  if (f.suite == "cost-formulation") {
    j["cost_nx"] = cfg.cost_nx;
    j["quad_nodes"] = cfg.quad_nodes;
  }
  if (f.suite == "large-step") {
    j["large_step_nx"] = cfg.large_step_nx;
    j["large_step_lambda"] = cfg.large_step_lambda;
    j["conservative_lambda"] = cfg.conservative_lambda;
    j["large_step_budget"] = cfg.large_step_budget;
    j["scene"] = f.scene.empty() ? (data_dir() / "maze.json").string() : f.scene;
  }
  return j;
}

int run_bench(const BenchFlags& f) {
  ExperimentConfig cfg;
  cfg.n_trials = f.trials;
  cfg.base_seed = f.seed;
  cfg.threads = f.threads;
  cfg.record_timing = f.record_timing;
  cfg.validate();
  const std::string effective = bench_config_json(f, cfg).dump(2) + "\n";
  if (f.suite == "kernel-comparison") {
    const BenchResults results = run_kernel_comparison(cfg);
    emit_report(results, f.out, {{"effective_config.json", effective}});
    for (const auto& row : summarize(results.rows()))
      if (row.iter == cfg.iterations)
        std::printf("%-10s u_obs %.5g +- %.2g  smoothness %.5g +- %.2g  success %.2f\n", row.method.c_str(),
                    row.u_obs_mean, row.u_obs_se, row.smoothness_mean, row.smoothness_se, row.success_rate);
  } else if (f.suite == "cost-formulation") {
    const CostFormulationSummary s = run_cost_formulation_comparison(cfg);
    const std::string report = cost_formulation_report(s);
    emit_report(s.results, f.out, {{"effective_config.json", effective}, {"cost_formulation.csv", report}});
    std::fputs(report.c_str(), stdout);
  } else {
    const Scene maze = f.scene.empty() ? load_maze_scene() : load_scene(f.scene);
    const LargeStepSummary s = run_large_step_experiment(cfg, maze);
    const std::string report = large_step_report(s);
    emit_report(s.results, f.out, {{"effective_config.json", effective}, {"large_step.csv", report}});
    std::fputs(report.c_str(), stdout);
  }
  return kExitOk;
}

// 15 significant digits; integral values keep a trailing ".0".
std::string format15(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

int run_quad_table(int n) {
  if (n < 1 || n > kMaxQuadratureNodes)
    throw ConfigError("quad-table: n must be in [1, " + std::to_string(kMaxQuadratureNodes) + "]");
  const QuadratureRule rule = legendre_rule(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    std::printf("%s %s\n", format15(rule.nodes[i]).c_str(), format15(rule.weights[i]).c_str());
    sum += rule.weights[i];
  }
  std::printf("sum %s\n", format15(sum).c_str());
  return kExitOk;
}

int run_check() {
  bool ok = true;
  for (const auto& c : run_checks()) {
    std::printf("%s %-40s worst %.3g  tol %.1g\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.worst, c.tolerance);
    ok = ok && c.passed;
  }
  return ok ? kExitOk : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trajectory optimization in reproducing kernel Hilbert spaces"};
  app.require_subcommand(1);

  PlanFlags plan;
  auto* plan_cmd = app.add_subcommand("plan", "Optimize a trajectory for one scene");
  plan_cmd->add_option("--scene", plan.scene, "Scene file (JSON)")->required();
  plan_cmd->add_option("--out", plan.out, "Output directory")->required();
  plan_cmd->add_option("--config", plan.config, "Config file (JSON); flags override it");
  plan_cmd->add_option("--kernel", plan.kernel, "gaussian | laplacian | bspline | waypoint_grid");
  plan_cmd->add_option("--sigma", plan.sigma, "RBF width");
  plan_cmd->add_option("--lambda", plan.lambda, "Step regularizer (> 0)");
  plan_cmd->add_option("--beta", plan.beta, "RKHS norm weight (>= 0)");
  plan_cmd->add_option("--nx", plan.nx, "Max-violation sections");
  plan_cmd->add_option("--iters", plan.iters, "Iteration cap");

  std::uint64_t gen_seed = 0;
  int gen_obstacles = 12;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("scene-gen", "Generate a random scene");
  gen_cmd->add_option("--seed", gen_seed, "RNG seed");
  gen_cmd->add_option("--obstacles", gen_obstacles, "Obstacle count")->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--out", gen_out, "Output scene file")->required();

  BenchFlags bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark suite");
  bench_cmd->add_option("--suite", bench.suite, "kernel-comparison | cost-formulation | large-step")
      ->required()
      ->check(CLI::IsMember({"kernel-comparison", "cost-formulation", "large-step"}));
  bench_cmd->add_option("--trials", bench.trials, "Trial count");
  bench_cmd->add_option("--seed", bench.seed, "Base seed (trial i uses seed + i)");
  bench_cmd->add_option("--out", bench.out, "Output directory")->required();
  bench_cmd->add_option("--threads", bench.threads, "Worker count (RKHS_MOTION_THREADS caps it)");
  bench_cmd->add_flag("--record-timing", bench.record_timing, "Write wall time into results.csv");
  bench_cmd->add_option("--scene", bench.scene, "Scene for the large-step suite (default: bundled maze)");

  int quad_n = 0;
  auto* quad_cmd = app.add_subcommand("quad-table", "Print Gauss-Legendre nodes and weights on [0, 1]");
  quad_cmd->add_option("--n", quad_n, "Node count (1..64)")->required();

  auto* check_cmd = app.add_subcommand("check", "Run the fast invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (*plan_cmd) return run_plan(plan);
    if (*gen_cmd) return run_scene_gen(gen_seed, gen_obstacles, gen_out);
    if (*bench_cmd) return run_bench(bench);
    if (*quad_cmd) return run_quad_table(quad_n);
    if (*check_cmd) return run_check();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
