#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace rkhs {

enum class KernelFamily {
  GaussianRbf,
  LaplacianRbf,
  BSpline,
  // Hat-function interpolation over a uniform waypoint grid with the inverse
  // acceleration metric as kernel matrix; the waypoint baseline seen as an RKHS.
  WaypointGrid,
};

std::string_view to_string(KernelFamily family);
KernelFamily kernel_family_from_string(std::string_view name);

class WaypointMetric;
class BSplineBasis;

// Scalar kernel family plus the joint-coupling matrix B. The matrix-valued
// kernel is separable: K(t, t') = k(t, t') * B. With derivative_order j > 0
// the scalar kernel becomes d^j/dt^j d^j/dt'^j k_base(t, t').
class KernelSpec {
 public:
  static KernelSpec gaussian(double sigma);
  static KernelSpec laplacian(double sigma);
  static KernelSpec bspline(int knots = 8, int degree = 3);
  static KernelSpec waypoint_grid(int waypoints);

  KernelFamily family() const { return family_; }
  double sigma() const { return sigma_; }
  int bspline_degree() const { return bspline_degree_; }
  int bspline_knots() const { return bspline_knots_; }
  int grid_size() const;
  int derivative_order() const { return derivative_order_; }
  bool has_coupling() const { return coupling_.size() > 0; }
  // Empty when no coupling was set.
  const Eigen::MatrixXd& coupling_matrix() const { return coupling_; }

  // Returns a copy whose scalar kernel is the order-j derivative kernel of
  // this (base) kernel. Order 0 returns the base kernel.
  KernelSpec derivative(int order) const;
  KernelSpec base() const;

  // B must be symmetric with strictly positive eigenvalues.
  KernelSpec with_coupling(Eigen::MatrixXd coupling) const;

  // D x D coupling; identity when none was set.
  Eigen::MatrixXd coupling(int dof) const;
  // Solves B x = rhs; identity when no coupling is set.
  Eigen::VectorXd solve_coupling(const Eigen::VectorXd& rhs) const;
  Eigen::VectorXd apply_coupling(const Eigen::VectorXd& v) const;

  // k(t, t').
  double eval(double t, double tp) const;
  // d^a/dt^a d^b/dt'^b k(t, t').
  double partial(double t, double tp, int dt, int dtp) const;
  // K(t, t') = k(t, t') * B.
  Eigen::MatrixXd eval_matrix(double t, double tp, int dof) const;

  // BSpline and WaypointGrid kernels are inner products of finite feature maps.
  bool finite_dimensional() const;

  const WaypointMetric* waypoint_metric() const { return grid_.get(); }
  const BSplineBasis* bspline_basis() const { return spline_.get(); }

 private:
  KernelSpec() = default;
  double base_partial(double t, double tp, int dt, int dtp) const;

  KernelFamily family_ = KernelFamily::GaussianRbf;
  double sigma_ = 0.5;
  int bspline_degree_ = 3;
  int bspline_knots_ = 8;
  int derivative_order_ = 0;
  Eigen::MatrixXd coupling_;
  std::shared_ptr<const Eigen::LDLT<Eigen::MatrixXd>> coupling_ldlt_;
  std::shared_ptr<const BSplineBasis> spline_;
  std::shared_ptr<const WaypointMetric> grid_;
};

// Scalar kernel k(t, t'); throws std::domain_error outside [0, 1].
double eval_scalar(const KernelSpec& spec, double t, double tp);
Eigen::MatrixXd eval_matrix(const KernelSpec& spec, double t, double tp, int dof);

// Block Gram matrix over a support set with a cached Cholesky factor.
class GramMatrix {
 public:
  GramMatrix(const KernelSpec& spec, std::vector<double> support, int dof);

  const std::vector<double>& support() const { return support_; }
  const Eigen::MatrixXd& values() const { return values_; }
  int dof() const { return dof_; }
  // Diagonal shift that was needed for the factorization (0 if none).
  double jitter() const { return jitter_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  std::vector<double> support_;
  int dof_;
  Eigen::MatrixXd values_;
  double jitter_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

GramMatrix gram(const KernelSpec& spec, std::span<const double> support, int dof);

// Scalar Gram matrix k(t_i, s_j).
Eigen::MatrixXd cross_kernel(const KernelSpec& spec, std::span<const double> a,
                             std::span<const double> b);

// sum_ij a_i^T K(t_i, s_j) b_j; rows of a and b are coefficient vectors.
double rkhs_inner(const KernelSpec& spec, std::span<const double> support_a,
                  const Eigen::MatrixXd& a, std::span<const double> support_b,
                  const Eigen::MatrixXd& b);
double rkhs_norm2(const KernelSpec& spec, std::span<const double> support,
                  const Eigen::MatrixXd& a);

}  // namespace rkhs
