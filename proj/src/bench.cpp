#include "rkhs_motion/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "rkhs_motion/errors.hpp"
#include "rkhs_motion/io.hpp"
#include "rkhs_motion/svg.hpp"

namespace rkhs {

namespace {

using Clock = std::chrono::steady_clock;

constexpr const char* kResultsHeader = "trial,method,iter,u_obs_dense,smoothness,success,support_size,ms";
constexpr double kZ95 = 1.959963984540054;

std::string method_name(const KernelSpec& spec) { return std::string(to_string(spec.family())); }

OptimizerConfig shared_optimizer(const ExperimentConfig& cfg, double lambda, ReduceOp reduce) {
  OptimizerConfig oc;
  oc.lambda = lambda;
  oc.beta = cfg.beta;
  oc.reduce = reduce;
  return oc;
}

std::vector<MethodSpec> comparison_methods(const ExperimentConfig& cfg) {
  const ReduceOp reduce = MaxViolation{cfg.nx, cfg.samples_per_section};
  std::vector<MethodSpec> methods;
  for (const auto& k : cfg.kernels) methods.push_back({method_name(k), k, shared_optimizer(cfg, cfg.lambda, reduce)});
  if (cfg.include_waypoints) methods.push_back({"waypoints", std::nullopt, shared_optimizer(cfg, cfg.lambda, reduce)});
  return methods;
}

// Runs every method on every trial scene, trial-parallel; results in trial order.
BenchResults run_suite(const std::string& suite, const ExperimentConfig& cfg,
                       const std::vector<MethodSpec>& methods,
                       const std::function<Scene(int)>& scene_for, int iterations) {
  BenchResults out;
  out.suite = suite;
  for (const auto& m : methods) out.methods.push_back(m.name);
  std::vector<std::vector<TrialResult>> per_trial(cfg.n_trials);
  parallel_for(cfg.n_trials, worker_count(cfg.threads), [&](int trial) {
    std::optional<Scene> scene;
    std::string scene_error;
    try {
      scene = scene_for(trial);
    } catch (const std::exception& e) {
      scene_error = e.what();
    }
    for (const auto& m : methods) {
      if (!scene) {
        TrialResult failed;
        failed.trial = trial;
        failed.method = m.name;
        failed.error = "scene: " + scene_error;
        per_trial[trial].push_back(std::move(failed));
        continue;
      }
      per_trial[trial].push_back(run_method(*scene, m, iterations, cfg, trial));
    }
  });
  std::vector<std::string> failures;
  for (auto& trial : per_trial) {
    for (auto& r : trial) {
      if (r.error) {
        failures.push_back("trial " + std::to_string(r.trial) + " " + r.method + ": " + *r.error);
      }
      out.trials.push_back(std::move(r));
    }
  }
  int failed_trials = 0;
  for (const auto& trial : per_trial)
    if (std::any_of(trial.begin(), trial.end(), [](const TrialResult& r) { return r.error.has_value(); }))
      ++failed_trials;
  if (failed_trials * 10 > cfg.n_trials) {
    std::ostringstream os;
    os << suite << ": " << failed_trials << " of " << cfg.n_trials << " trials failed";
    for (const auto& f : failures) os << "\n  " << f;
    throw BenchAborted(os.str());
  }
  return out;
}

std::string csv_escape_free(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

std::string failures_csv(const BenchResults& results) {
  std::ostringstream os;
  os << "trial,method,error\n";
  for (const auto& t : results.trials)
    if (t.error) os << t.trial << "," << t.method << "," << csv_escape_free(*t.error) << "\n";
  return os.str();
}

// Two side-by-side panels in one document.
std::string two_panel_svg(const std::string& left, const std::string& right) {
  auto strip = [](const std::string& doc) {
    const auto open_end = doc.find('>');
    const auto close = doc.rfind("</svg>");
    return doc.substr(open_end + 1, close - open_end - 1);
  };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1280\" height=\"420\">\n";
  os << "<svg x=\"0\" y=\"0\" width=\"640\" height=\"420\">" << strip(left) << "</svg>\n";
  os << "<svg x=\"640\" y=\"0\" width=\"640\" height=\"420\">" << strip(right) << "</svg>\n";
  os << "</svg>\n";
  return os.str();
}

std::string summary_plot(const BenchResults& results, const std::vector<SummaryRow>& summary) {
  std::vector<PlotSeries> cost, smooth;
  for (const auto& m : results.methods) {
    PlotSeries c{m, {}, {}, {}}, s{m, {}, {}, {}};
    for (const auto& r : summary) {
      if (r.method != m) continue;
      c.x.push_back(r.iter);
      c.y.push_back(r.u_obs_mean);
      c.err.push_back(r.u_obs_se);
      s.x.push_back(r.iter);
      s.y.push_back(r.smoothness_mean);
      s.err.push_back(r.smoothness_se);
    }
    if (!c.x.empty()) {
      cost.push_back(std::move(c));
      smooth.push_back(std::move(s));
    }
  }
  return two_panel_svg(line_plot_svg(results.suite + ": obstacle cost", "iteration", "dense U_obs", cost),
                       line_plot_svg(results.suite + ": smoothness", "iteration", "0.5 x'Ax", smooth));
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n_trials < 1) throw ConfigError("bench: n_trials must be >= 1");
  if (n_obstacles < 0) throw ConfigError("bench: n_obstacles must be >= 0");
  if (iterations < 1) throw ConfigError("bench: iterations must be >= 1");
  if (waypoints < 3) throw ConfigError("bench: waypoints must be >= 3");
  if (!(lambda > 0.0) || !(large_step_lambda > 0.0) || !(conservative_lambda > 0.0))
    throw ConfigError("bench: lambda must be > 0");
  if (beta < 0.0) throw ConfigError("bench: beta must be >= 0");
  if (nx < 1 || cost_nx < 1 || large_step_nx < 1 || samples_per_section < 1)
    throw ConfigError("bench: section counts must be >= 1");
  if (quad_nodes < 1 || quad_nodes > kMaxQuadratureNodes) throw ConfigError("bench: quad_nodes out of range");
  if (dense_samples < 2) throw ConfigError("bench: dense_samples must be >= 2");
  if (large_step_budget < 1) throw ConfigError("bench: large_step_budget must be >= 1");
}

std::vector<ResultRow> BenchResults::rows() const {
  std::vector<ResultRow> out;
  for (const auto& t : trials) out.insert(out.end(), t.rows.begin(), t.rows.end());
  return out;
}

const TrialResult* BenchResults::find(int trial, const std::string& method) const {
  for (const auto& t : trials)
    if (t.trial == trial && t.method == method) return &t;
  return nullptr;
}

MeanSe mean_se(const std::vector<double>& values) {
  MeanSe out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / n;
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  std::vector<std::string> order;
  std::map<std::pair<std::string, int>, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) {
    if (std::find(order.begin(), order.end(), r.method) == order.end()) order.push_back(r.method);
    groups[{r.method, r.iter}].push_back(&r);
  }
  std::vector<SummaryRow> out;
  for (const auto& m : order) {
    for (const auto& [key, group] : groups) {
      if (key.first != m) continue;
      std::vector<double> u, s;
      int successes = 0;
      for (const auto* r : group) {
        u.push_back(r->u_obs_dense);
        s.push_back(r->smoothness);
        successes += r->success ? 1 : 0;
      }
      const MeanSe mu = mean_se(u), ms = mean_se(s);
      SummaryRow row;
      row.method = m;
      row.iter = key.second;
      row.n = static_cast<int>(group.size());
      row.u_obs_mean = mu.mean;
      row.u_obs_se = mu.se;
      row.smoothness_mean = ms.mean;
      row.smoothness_se = ms.se;
      row.success_rate = static_cast<double>(successes) / row.n;
      out.push_back(row);
    }
  }
  return out;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << kResultsHeader << "\n";
  for (const auto& r : rows) {
    os << r.trial << "," << r.method << "," << r.iter << "," << format_double(r.u_obs_dense) << ","
       << format_double(r.smoothness) << "," << (r.success ? 1 : 0) << "," << r.support_size << ","
       << format_double(r.ms) << "\n";
  }
  return os.str();
}

std::vector<ResultRow> parse_results_csv(const std::string& text) {
  const CsvTable table = parse_csv(text);
  std::ostringstream header;
  for (std::size_t i = 0; i < table.header.size(); ++i) header << (i ? "," : "") << table.header[i];
  if (header.str() != kResultsHeader) throw std::runtime_error("results.csv: unexpected header");
  std::vector<ResultRow> rows;
  for (const auto& cells : table.rows) {
    if (cells.size() != 8) throw std::runtime_error("results.csv: expected 8 columns");
    ResultRow r;
    r.trial = std::stoi(cells[0]);
    r.method = cells[1];
    r.iter = std::stoi(cells[2]);
    r.u_obs_dense = std::stod(cells[3]);
    r.smoothness = std::stod(cells[4]);
    r.success = cells[5] == "1";
    r.support_size = static_cast<std::size_t>(std::stoull(cells[6]));
    r.ms = std::stod(cells[7]);
    rows.push_back(r);
  }
  return rows;
}

std::string summary_csv(const std::vector<SummaryRow>& summary) {
  std::ostringstream os;
  os << "method,iter,n,u_obs_mean,u_obs_se,smoothness_mean,smoothness_se,success_rate\n";
  for (const auto& r : summary) {
    os << r.method << "," << r.iter << "," << r.n << "," << format_double(r.u_obs_mean) << ","
       << format_double(r.u_obs_se) << "," << format_double(r.smoothness_mean) << ","
       << format_double(r.smoothness_se) << "," << format_double(r.success_rate) << "\n";
  }
  return os.str();
}

TrialResult run_method(const Scene& scene, const MethodSpec& method, int iterations, const ExperimentConfig& cfg,
                       int trial) {
  TrialResult out;
  out.trial = trial;
  out.method = method.name;
  const OptimizerConfig oc = method.optimizer.fixed_iterations(iterations);
  const DensePathIntegral dense{cfg.dense_samples};
  auto last = Clock::now();
  const auto started = last;
  const IterateObserver observe = [&](int n, const Trajectory& xi) {
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - last).count();
    ResultRow row;
    row.trial = trial;
    row.method = method.name;
    row.iter = n;
    row.u_obs_dense = u_obs(xi, scene, dense);
    const WaypointTrajectory dense_xi = densify(xi, kDefaultWaypoints);
    row.smoothness = dense_xi.smoothness();
    out.final_oscillation = velocity_total_variation(dense_xi);
    row.success = min_clearance(xi, scene, cfg.dense_samples) > 0.0;
    row.ms = cfg.record_timing ? ms : 0.0;
    out.rows.push_back(row);
    last = Clock::now();
  };
  try {
    IterationTrace trace;
    if (method.kernel) {
      trace = optimize(scene, oc, *method.kernel, observe).trace;
    } else {
      trace = optimize_waypoints(scene, oc, cfg.waypoints, observe).trace;
    }
    for (auto& row : out.rows) row.support_size = trace.records.at(row.iter - 1).support_size;
    for (const auto& rec : trace.records) {
      out.max_endpoint_residual = std::max(out.max_endpoint_residual, rec.endpoint_residual);
      out.max_limit_violation = std::max(out.max_limit_violation, rec.limit_violation);
    }
  } catch (const std::exception& e) {
    out.rows.clear();
    out.error = e.what();
  }
  out.total_ms = std::chrono::duration<double, std::milli>(Clock::now() - started).count();
  return out;
}

BenchResults run_kernel_comparison(const ExperimentConfig& cfg) {
  cfg.validate();
  const PlanarArm arm = default_arm();
  const auto q_start = default_q_start();
  const auto q_goal = default_q_goal();
  return run_suite(
      "kernel-comparison", cfg, comparison_methods(cfg),
      [&](int trial) { return generate_scene(cfg.trial_seed(trial), cfg.n_obstacles, arm, q_start, q_goal); },
      cfg.iterations);
}

CostFormulationSummary run_cost_formulation_comparison(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.kernels.empty()) throw ConfigError("bench: cost formulation needs a kernel");
  const PlanarArm arm = default_arm();
  const auto q_start = default_q_start();
  const auto q_goal = default_q_goal();
  const KernelSpec& kernel = cfg.kernels.front();
  const std::vector<MethodSpec> methods = {
      {"max", kernel, shared_optimizer(cfg, cfg.lambda, MaxViolation{cfg.cost_nx, cfg.samples_per_section})},
      {"quadrature", kernel, shared_optimizer(cfg, cfg.lambda, Quadrature{cfg.quad_nodes})},
  };
  CostFormulationSummary s;
  s.results = run_suite(
      "cost-formulation", cfg, methods,
      [&](int trial) { return generate_scene(cfg.trial_seed(trial), cfg.n_obstacles, arm, q_start, q_goal); },
      cfg.iterations);
  std::vector<double> diff;
  for (int trial = 0; trial < cfg.n_trials; ++trial) {
    const auto* a = s.results.find(trial, "max");
    const auto* b = s.results.find(trial, "quadrature");
    if (a == nullptr || b == nullptr || a->error || b->error) continue;
    const double ua = a->rows.back().u_obs_dense, ub = b->rows.back().u_obs_dense;
    s.dense_max.push_back(ua);
    s.dense_quadrature.push_back(ub);
    diff.push_back(ua - ub);
    if (std::abs(ua - ub) <= 1e-12) {
      ++s.ties;
    } else if (ua < ub) {
      ++s.max_lower;
    } else {
      ++s.quadrature_lower;
    }
  }
  const double mean_max = mean_se(s.dense_max).mean;
  const double mean_quad = mean_se(s.dense_quadrature).mean;
  const MeanSe d = mean_se(diff);
  if (mean_quad > 0.0) {
    s.gap_max_over_quadrature = d.mean / mean_quad;
    s.ci95_max_over_quadrature = kZ95 * d.se / mean_quad;
  }
  if (mean_max > 0.0) {
    s.gap_quadrature_over_max = -d.mean / mean_max;
    s.ci95_quadrature_over_max = kZ95 * d.se / mean_max;
  }
  return s;
}

LargeStepSummary run_large_step_experiment(const ExperimentConfig& cfg, const Scene& maze) {
  cfg.validate();
  const ReduceOp reduce = MaxViolation{cfg.large_step_nx, cfg.samples_per_section};
  const KernelSpec gaussian =
      cfg.kernels.empty() || cfg.kernels.front().family() != KernelFamily::GaussianRbf ? KernelSpec::gaussian(0.35)
                                                                                      : cfg.kernels.front();
  const std::vector<MethodSpec> methods = {
      {"gaussian", gaussian, shared_optimizer(cfg, cfg.large_step_lambda, reduce)},
      {"waypoints", std::nullopt, shared_optimizer(cfg, cfg.large_step_lambda, reduce)},
      {"waypoints_conservative", std::nullopt, shared_optimizer(cfg, cfg.conservative_lambda, reduce)},
  };
  ExperimentConfig single = cfg;
  single.n_trials = 1;
  LargeStepSummary s;
  s.results = run_suite("large-step", single, methods, [&](int) { return maze; }, cfg.large_step_budget);
  const bool start_free = min_clearance(init_straight_line(maze.q_start, maze.q_goal, gaussian), maze,
                                        cfg.dense_samples) > 0.0;
  for (const auto& m : methods) {
    LargeStepMethod out;
    out.name = m.name;
    out.lambda = m.optimizer.lambda;
    const auto* t = s.results.find(0, m.name);
    if (t != nullptr && !t->rows.empty()) {
      if (start_free) {
        out.iterations_to_collision_free = 0;
      } else {
        for (const auto& r : t->rows)
          if (r.success) {
            out.iterations_to_collision_free = r.iter;
            break;
          }
      }
      out.final_u_obs = t->rows.back().u_obs_dense;
      out.final_smoothness = t->rows.back().smoothness;
      out.oscillation = t->final_oscillation;
    }
    s.methods.push_back(out);
  }
  return s;
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("RKHS_MOTION_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return RKHS_MOTION_DATA_DIR;
}

Scene load_maze_scene() { return load_scene(data_dir() / "maze.json"); }

void emit_report(const BenchResults& results, const std::filesystem::path& out_dir,
                 const std::vector<std::pair<std::string, std::string>>& extra) {
  const std::vector<ResultRow> rows = results.rows();
  if (rows.empty()) throw std::runtime_error("emit_report: no trial results to write");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + out_dir.string() + ": " + ec.message());
  const auto summary = summarize(rows);
  AtomicFileSet files(out_dir);
  files.add("results.csv", results_csv(rows));
  files.add("summary.csv", summary_csv(summary));
  files.add("failures.csv", failures_csv(results));
  files.add(results.suite + ".svg", summary_plot(results, summary));
  for (const auto& [name, content] : extra) files.add(name, content);
  files.commit();
}

std::string cost_formulation_report(const CostFormulationSummary& s) {
  std::ostringstream os;
  os << "metric,value\n";
  os << "trials," << s.dense_max.size() << "\n";
  os << "mean_dense_max," << format_double(mean_se(s.dense_max).mean) << "\n";
  os << "mean_dense_quadrature," << format_double(mean_se(s.dense_quadrature).mean) << "\n";
  os << "gap_max_over_quadrature," << format_double(s.gap_max_over_quadrature) << "\n";
  os << "ci95_max_over_quadrature," << format_double(s.ci95_max_over_quadrature) << "\n";
  os << "gap_quadrature_over_max," << format_double(s.gap_quadrature_over_max) << "\n";
  os << "ci95_quadrature_over_max," << format_double(s.ci95_quadrature_over_max) << "\n";
  os << "paired_max_lower," << s.max_lower << "\n";
  os << "paired_quadrature_lower," << s.quadrature_lower << "\n";
  os << "paired_ties," << s.ties << "\n";
  return os.str();
}

std::string large_step_report(const LargeStepSummary& s) {
  std::ostringstream os;
  os << "method,lambda,iterations_to_collision_free,final_u_obs_dense,final_smoothness,oscillation\n";
  for (const auto& m : s.methods) {
    os << m.name << "," << format_double(m.lambda) << "," << m.iterations_to_collision_free << ","
       << format_double(m.final_u_obs) << "," << format_double(m.final_smoothness) << ","
       << format_double(m.oscillation) << "\n";
  }
  return os.str();
}

int worker_count(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("RKHS_MOTION_THREADS"); env != nullptr) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return std::max(1, n);
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace rkhs
