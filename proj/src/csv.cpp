#include "rkhs_motion/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace rkhs {

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

std::filesystem::path temp_sibling(const std::filesystem::path& path) {
  return path.parent_path() / ("." + path.filename().string() + ".tmp");
}

void write_or_throw(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = temp_sibling(path);
  write_or_throw(tmp, content);
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot rename into " + path.string());
  }
}

AtomicFileSet::AtomicFileSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

AtomicFileSet::~AtomicFileSet() {
  if (committed_) return;
  std::error_code ec;
  for (const auto& [tmp, _] : staged_) std::filesystem::remove(tmp, ec);
}

void AtomicFileSet::add(const std::string& name, const std::string& content) {
  const auto path = dir_ / name;
  const auto tmp = temp_sibling(path);
  staged_.emplace_back(tmp, path);
  write_or_throw(tmp, content);
}

void AtomicFileSet::commit() {
  for (const auto& [tmp, path] : staged_) {
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw std::runtime_error("cannot rename into " + path.string());
  }
  committed_ = true;
}

std::string trajectory_csv(const Trajectory& xi, int samples) {
  if (samples < 2) throw std::invalid_argument("trajectory_csv: need at least 2 samples");
  std::ostringstream os;
  os << "t";
  for (int d = 1; d <= xi.dof(); ++d) os << ",q_" << d;
  os << "\n";
  for (int k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) / (samples - 1);
    const Eigen::VectorXd q = xi.eval(t);
    os << format_double(t);
    for (Eigen::Index d = 0; d < q.size(); ++d) os << "," << format_double(q(d));
    os << "\n";
  }
  return os.str();
}

std::string support_csv(const KernelTrajectory& xi) {
  std::ostringstream os;
  os << "t_i";
  for (int d = 1; d <= xi.dof(); ++d) os << ",a_i" << d;
  os << "\n";
  for (std::size_t i = 0; i < xi.support().size(); ++i) {
    os << format_double(xi.support()[i]);
    for (int d = 0; d < xi.dof(); ++d) os << "," << format_double(xi.coeffs()(i, d));
    os << "\n";
  }
  return os.str();
}

std::string trace_csv(const IterationTrace& trace) {
  std::ostringstream os;
  os << "iter,u_obs,norm2,u_total,support_size,endpoint_residual,ms\n";
  for (const auto& r : trace.records)
    os << r.iter << "," << format_double(r.u_obs) << "," << format_double(r.norm2) << ","
       << format_double(r.u_total) << "," << r.support_size << "," << format_double(r.endpoint_residual)
       << "," << format_double(r.ms) << "\n";
  return os.str();
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ls(s);
    while (std::getline(ls, field, ',')) out.push_back(field);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  if (std::getline(in, line)) table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != table.header.size()) throw std::runtime_error("csv: ragged row: " + line);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace rkhs
