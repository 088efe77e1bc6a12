#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rkhs_motion/kernels.hpp"
#include "rkhs_motion/optimizer.hpp"
#include "rkhs_motion/world.hpp"

namespace rkhs {

// More than 10% of trials failed; the message lists them.
class BenchAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  int n_trials = 100;
  int n_obstacles = 12;
  int iterations = 10;
  std::uint64_t base_seed = 0;
  std::vector<KernelSpec> kernels = {KernelSpec::gaussian(0.35), KernelSpec::laplacian(0.35),
                                     KernelSpec::bspline(8, 3)};
  bool include_waypoints = true;
  int waypoints = kDefaultWaypoints;
  // Shared by every method in a trial.
  double lambda = 3.0;
  double beta = 0.5;
  int nx = 4;
  int samples_per_section = 32;
  // Dense reference: obstacle cost integral and collision scan resolution.
  int dense_samples = 1000;

  // Cost-formulation suite: max with cost_nx sections vs Quadrature(quad_nodes).
  int cost_nx = 4;
  int quad_nodes = 20;

  // Large-step suite.
  int large_step_nx = 5;
  double large_step_lambda = 1.0;
  double conservative_lambda = 10.0;
  int large_step_budget = 40;

  // 0 picks RKHS_MOTION_THREADS, else the hardware concurrency.
  int threads = 0;
  // Wall time per iteration goes into results.csv only when set; otherwise the
  // column is 0 so identical inputs give byte-identical files.
  bool record_timing = false;

  void validate() const;
  std::uint64_t trial_seed(int trial) const { return base_seed + static_cast<std::uint64_t>(trial); }
};

// One results.csv row.
struct ResultRow {
  int trial = 0;
  std::string method;
  int iter = 0;
  double u_obs_dense = 0.0;
  double smoothness = 0.0;
  bool success = false;
  std::size_t support_size = 0;
  double ms = 0.0;
};

struct TrialResult {
  int trial = 0;
  std::string method;
  std::vector<ResultRow> rows;  // iterations 1..N
  // Worst over every iterate, including the initial line.
  double max_endpoint_residual = 0.0;
  double max_limit_violation = 0.0;
  // Velocity total variation of the densified last iterate.
  double final_oscillation = 0.0;
  double total_ms = 0.0;
  std::optional<std::string> error;
};

struct BenchResults {
  std::string suite;
  std::vector<std::string> methods;
  std::vector<TrialResult> trials;  // trial-major, method order within a trial

  std::vector<ResultRow> rows() const;
  const TrialResult* find(int trial, const std::string& method) const;
};

struct SummaryRow {
  std::string method;
  int iter = 0;
  int n = 0;
  double u_obs_mean = 0.0;
  double u_obs_se = 0.0;
  double smoothness_mean = 0.0;
  double smoothness_se = 0.0;
  double success_rate = 0.0;
};

// Mean and standard error (sample stddev / sqrt(n); 0 for n = 1).
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};
MeanSe mean_se(const std::vector<double>& values);

// Groups by (method in first-appearance order, iter).
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

std::string results_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results_csv(const std::string& text);
std::string summary_csv(const std::vector<SummaryRow>& summary);

// Method runner shared by the suites.
struct MethodSpec {
  std::string name;
  std::optional<KernelSpec> kernel;  // empty: waypoint baseline
  OptimizerConfig optimizer;
};

TrialResult run_method(const Scene& scene, const MethodSpec& method, int iterations, const ExperimentConfig& cfg,
                       int trial);

BenchResults run_kernel_comparison(const ExperimentConfig& cfg);

struct CostFormulationSummary {
  BenchResults results;
  // Per-trial final dense-reference cost of each formulation.
  std::vector<double> dense_max;
  std::vector<double> dense_quadrature;
  // mean(max) / mean(quadrature) - 1 and the reverse.
  double gap_max_over_quadrature = 0.0;
  double gap_quadrature_over_max = 0.0;
  // 95% interval half-widths of the paired mean difference, relative to each
  // denominator.
  double ci95_max_over_quadrature = 0.0;
  double ci95_quadrature_over_max = 0.0;
  int max_lower = 0;
  int quadrature_lower = 0;
  int ties = 0;
};

CostFormulationSummary run_cost_formulation_comparison(const ExperimentConfig& cfg);

struct LargeStepMethod {
  std::string name;
  double lambda = 0.0;
  int iterations_to_collision_free = -1;  // -1: not reached within budget
  double final_u_obs = 0.0;
  double final_smoothness = 0.0;
  // Velocity total variation of the densified final iterate.
  double oscillation = 0.0;
};

struct LargeStepSummary {
  BenchResults results;
  std::vector<LargeStepMethod> methods;
};

LargeStepSummary run_large_step_experiment(const ExperimentConfig& cfg, const Scene& maze);

// Directory holding the bundled scenes (data/).
std::filesystem::path data_dir();
Scene load_maze_scene();

// Writes results.csv, summary.csv, and a cost-vs-iteration SVG for the suite;
// `extra` files (name, content) are published in the same atomic set.
void emit_report(const BenchResults& results, const std::filesystem::path& out_dir,
                 const std::vector<std::pair<std::string, std::string>>& extra = {});

std::string cost_formulation_report(const CostFormulationSummary& summary);
std::string large_step_report(const LargeStepSummary& summary);

// Worker count from RKHS_MOTION_THREADS (if set and positive) capped by
// `requested` when that is positive.
int worker_count(int requested);

// Runs fn(i) for i in [0, n) on `workers` threads; the first exception is rethrown.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace rkhs
