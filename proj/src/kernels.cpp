#include "rkhs_motion/kernels.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rkhs_motion/bspline.hpp"
#include "rkhs_motion/errors.hpp"
#include "rkhs_motion/waypoint_metric.hpp"

namespace rkhs {

namespace {

void check_time(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    std::ostringstream os;
    os << "kernel: time " << t << " outside [0, 1]";
    throw std::domain_error(os.str());
  }
}

// Probabilists' Hermite polynomial He_n(x).
double hermite(int n, double x) {
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = x;
  for (int k = 1; k < n; ++k) {
    const double next = x * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

// d^n/dr^n exp(-r^2 / (2 sigma^2)) = (-1/sigma)^n He_n(r / sigma) exp(...)
double gaussian_derivative(int n, double r, double sigma) {
  const double x = r / sigma;
  return std::pow(-1.0 / sigma, n) * hermite(n, x) * std::exp(-0.5 * x * x);
}

}  // namespace

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::GaussianRbf: return "gaussian";
    case KernelFamily::LaplacianRbf: return "laplacian";
    case KernelFamily::BSpline: return "bspline";
    case KernelFamily::WaypointGrid: return "waypoint_grid";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "gaussian") return KernelFamily::GaussianRbf;
  if (name == "laplacian") return KernelFamily::LaplacianRbf;
  if (name == "bspline") return KernelFamily::BSpline;
  if (name == "waypoint_grid") return KernelFamily::WaypointGrid;
  throw std::invalid_argument("unknown kernel family '" + std::string(name) +
                              "' (valid: gaussian, laplacian, bspline, waypoint_grid)");
}

KernelSpec KernelSpec::gaussian(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian kernel: sigma must be > 0");
  KernelSpec spec;
  spec.family_ = KernelFamily::GaussianRbf;
  spec.sigma_ = sigma;
  return spec;
}

KernelSpec KernelSpec::laplacian(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("laplacian kernel: sigma must be > 0");
  KernelSpec spec;
  spec.family_ = KernelFamily::LaplacianRbf;
  spec.sigma_ = sigma;
  return spec;
}

KernelSpec KernelSpec::bspline(int knots, int degree) {
  KernelSpec spec;
  spec.family_ = KernelFamily::BSpline;
  spec.bspline_knots_ = knots;
  spec.bspline_degree_ = degree;
  spec.spline_ = std::make_shared<const BSplineBasis>(knots, degree);
  return spec;
}

KernelSpec KernelSpec::waypoint_grid(int waypoints) {
  KernelSpec spec;
  spec.family_ = KernelFamily::WaypointGrid;
  spec.grid_ = std::make_shared<const WaypointMetric>(waypoints);
  return spec;
}

int KernelSpec::grid_size() const { return grid_ ? grid_->size() : 0; }

KernelSpec KernelSpec::derivative(int order) const {
  if (order < 0) throw std::invalid_argument("derivative kernel: order must be >= 0");
  if (derivative_order_ != 0 && order != 0)
    throw UnsupportedError("derivative kernel: base kernel is already a derivative kernel");
  if (order > 0) {
    switch (family_) {
      case KernelFamily::GaussianRbf:
        if (order > 2) throw UnsupportedError("derivative kernel: gaussian supports orders 1 and 2");
        break;
      case KernelFamily::LaplacianRbf:
        throw UnsupportedError("derivative kernel: laplacian kernel is not differentiable at 0");
      case KernelFamily::BSpline:
        if (order > bspline_degree_)
          throw UnsupportedError("derivative kernel: order exceeds B-spline degree");
        break;
      case KernelFamily::WaypointGrid:
        throw UnsupportedError("derivative kernel: waypoint grid kernel is piecewise linear");
    }
  }
  KernelSpec out = *this;
  out.derivative_order_ = order;
  return out;
}

KernelSpec KernelSpec::base() const {
  KernelSpec out = *this;
  out.derivative_order_ = 0;
  return out;
}

KernelSpec KernelSpec::with_coupling(Eigen::MatrixXd coupling) const {
  if (coupling.rows() != coupling.cols() || coupling.rows() == 0)
    throw std::invalid_argument("kernel coupling: matrix must be square and non-empty");
  if ((coupling - coupling.transpose()).cwiseAbs().maxCoeff() > 1e-12 * coupling.cwiseAbs().maxCoeff())
    throw std::invalid_argument("kernel coupling: matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(coupling, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("kernel coupling: matrix must be positive definite");
  KernelSpec out = *this;
  out.coupling_ldlt_ = std::make_shared<const Eigen::LDLT<Eigen::MatrixXd>>(coupling);
  out.coupling_ = std::move(coupling);
  return out;
}

Eigen::MatrixXd KernelSpec::coupling(int dof) const {
  if (!has_coupling()) return Eigen::MatrixXd::Identity(dof, dof);
  if (coupling_.rows() != dof) throw std::invalid_argument("kernel coupling: dimension mismatch");
  return coupling_;
}

Eigen::VectorXd KernelSpec::solve_coupling(const Eigen::VectorXd& rhs) const {
  if (!has_coupling()) return rhs;
  if (coupling_.rows() != rhs.size()) throw std::invalid_argument("kernel coupling: dimension mismatch");
  return coupling_ldlt_->solve(rhs);
}

Eigen::VectorXd KernelSpec::apply_coupling(const Eigen::VectorXd& v) const {
  if (!has_coupling()) return v;
  if (coupling_.rows() != v.size()) throw std::invalid_argument("kernel coupling: dimension mismatch");
  return coupling_ * v;
}

bool KernelSpec::finite_dimensional() const {
  return family_ == KernelFamily::BSpline || family_ == KernelFamily::WaypointGrid;
}

double KernelSpec::base_partial(double t, double tp, int dt, int dtp) const {
  switch (family_) {
    case KernelFamily::GaussianRbf: {
      const double sign = (dtp % 2 == 0) ? 1.0 : -1.0;
      return sign * gaussian_derivative(dt + dtp, t - tp, sigma_);
    }
    case KernelFamily::LaplacianRbf:
      if (dt != 0 || dtp != 0)
        throw UnsupportedError("laplacian kernel: derivatives are not supported");
      return std::exp(-std::abs(t - tp) / sigma_);
    case KernelFamily::BSpline:
      return spline_->eval(t, dt).dot(spline_->eval(tp, dtp));
    case KernelFamily::WaypointGrid: {
      if (dt > 1 || dtp > 1)
        throw UnsupportedError("waypoint grid kernel: only first derivatives are defined");
      const auto a = grid_->hat(t, dt == 1);
      const auto b = grid_->hat(tp, dtp == 1);
      const Eigen::MatrixXd& inv = grid_->interior_inverse();
      double sum = 0.0;
      for (int i = 0; i < 2; ++i) {
        if (a.index[i] < 0) continue;
        for (int j = 0; j < 2; ++j) {
          if (b.index[j] < 0) continue;
          sum += a.weight[i] * inv(a.index[i], b.index[j]) * b.weight[j];
        }
      }
      return sum;
    }
  }
  return 0.0;
}

double KernelSpec::partial(double t, double tp, int dt, int dtp) const {
  check_time(t);
  check_time(tp);
  return base_partial(t, tp, dt + derivative_order_, dtp + derivative_order_);
}

double KernelSpec::eval(double t, double tp) const { return partial(t, tp, 0, 0); }

Eigen::MatrixXd KernelSpec::eval_matrix(double t, double tp, int dof) const {
  return eval(t, tp) * coupling(dof);
}

double eval_scalar(const KernelSpec& spec, double t, double tp) { return spec.eval(t, tp); }

Eigen::MatrixXd eval_matrix(const KernelSpec& spec, double t, double tp, int dof) {
  return spec.eval_matrix(t, tp, dof);
}

Eigen::MatrixXd cross_kernel(const KernelSpec& spec, std::span<const double> a,
                             std::span<const double> b) {
  Eigen::MatrixXd out(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out(i, j) = spec.eval(a[i], b[j]);
  return out;
}

GramMatrix::GramMatrix(const KernelSpec& spec, std::vector<double> support, int dof)
    : support_(std::move(support)), dof_(dof) {
  const int n = static_cast<int>(support_.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (support_[i] == support_[j]) throw std::invalid_argument("gram: duplicate support time");
  const Eigen::MatrixXd scalar = cross_kernel(spec, support_, support_);
  const Eigen::MatrixXd coupling = spec.coupling(dof);
  values_.resize(n * dof, n * dof);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) values_.block(i * dof, j * dof, dof, dof) = scalar(i, j) * coupling;
  if (n == 0) return;

  llt_.compute(values_);
  if (llt_.info() == Eigen::Success) return;
  // Near-duplicate support times make RBF Grams numerically singular.
  const double scale = values_.trace() / values_.rows();
  for (double rel = 1e-10; rel <= 1e-6 * (1 + 1e-9); rel *= 10.0) {
    jitter_ = rel * scale;
    Eigen::MatrixXd shifted = values_;
    shifted.diagonal().array() += jitter_;
    llt_.compute(shifted);
    if (llt_.info() == Eigen::Success) return;
  }
  throw FactorizationError("gram: factorization failed after jitter escalation");
}

Eigen::VectorXd GramMatrix::solve(const Eigen::VectorXd& rhs) const {
  if (rhs.size() != values_.rows()) throw std::invalid_argument("gram: rhs dimension mismatch");
  return llt_.solve(rhs);
}

GramMatrix gram(const KernelSpec& spec, std::span<const double> support, int dof) {
  return GramMatrix(spec, std::vector<double>(support.begin(), support.end()), dof);
}

double rkhs_inner(const KernelSpec& spec, std::span<const double> support_a,
                  const Eigen::MatrixXd& a, std::span<const double> support_b,
                  const Eigen::MatrixXd& b) {
  if (a.rows() != static_cast<Eigen::Index>(support_a.size()) ||
      b.rows() != static_cast<Eigen::Index>(support_b.size()))
    throw std::invalid_argument("rkhs_inner: coefficient rows must match support size");
  if (a.rows() == 0 || b.rows() == 0) return 0.0;
  if (a.cols() != b.cols()) throw std::invalid_argument("rkhs_inner: dimension mismatch");
  const Eigen::MatrixXd scalar = cross_kernel(spec, support_a, support_b);
  const Eigen::MatrixXd coupled = b * spec.coupling(static_cast<int>(b.cols()));
  return (a.transpose() * scalar * coupled).trace();
}

double rkhs_norm2(const KernelSpec& spec, std::span<const double> support,
                  const Eigen::MatrixXd& a) {
  return rkhs_inner(spec, support, a, support, a);
}

}  // namespace rkhs
