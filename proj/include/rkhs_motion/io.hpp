#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "rkhs_motion/optimizer.hpp"
#include "rkhs_motion/trajectory.hpp"

namespace rkhs {

// Shortest round-trip representation ("%.17g").
std::string format_double(double value);

// Writes through a temporary sibling and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Stages several files and publishes them only if every write succeeded.
class AtomicFileSet {
 public:
  explicit AtomicFileSet(std::filesystem::path dir);
  ~AtomicFileSet();
  AtomicFileSet(const AtomicFileSet&) = delete;
  AtomicFileSet& operator=(const AtomicFileSet&) = delete;

  void add(const std::string& name, const std::string& content);
  void commit();

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::filesystem::path, std::filesystem::path>> staged_;
  bool committed_ = false;
};

// t,q_1,...,q_D at `samples` uniform times.
std::string trajectory_csv(const Trajectory& xi, int samples);
// t_i,a_i1,...,a_iD.
std::string support_csv(const KernelTrajectory& xi);
// iter,u_obs,norm2,u_total,support_size,endpoint_residual,ms
std::string trace_csv(const IterationTrace& trace);

// Minimal CSV reader for files written by this library (no quoting).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable parse_csv(const std::string& text);
std::string read_file(const std::filesystem::path& path);

}  // namespace rkhs
