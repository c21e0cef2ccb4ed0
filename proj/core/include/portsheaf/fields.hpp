#pragma once

#include "portsheaf/trajectory.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

namespace portsheaf {

using MatrixField = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
using ScalarField = std::function<double(const Eigen::VectorXd&)>;
using GradientField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Constant matrix field.
MatrixField constant_field(Eigen::MatrixXd m);

/// Central differences with step 1e-6 (1 + |x_i|) per coordinate.
Eigen::VectorXd finite_difference_gradient(const ScalarField& f, const Eigen::VectorXd& x);

/// max |M + M^T|.
double antisymmetry_defect(const Eigen::MatrixXd& m);
/// max |M - M^T|.
double symmetry_defect(const Eigen::MatrixXd& m);
/// Smallest eigenvalue of (M + M^T) / 2; +inf for an empty matrix.
double min_symmetric_eigenvalue(const Eigen::MatrixXd& m);

/// Cross-product matrix: hat(a) b = a x b.
Eigen::Matrix3d hat(const Eigen::Vector3d& a);

/// Deterministic points uniform in [-magnitude, magnitude]^dim.
std::vector<Eigen::VectorXd> probe_points(Index dim, std::size_t count, std::uint64_t seed,
                                          double magnitude = 2.0);

/// Second-order time derivative of every channel: central differences in the
/// interior, one-sided three-point stencils at the ends. Two nodes fall back
/// to the forward difference; a single node has derivative zero.
Eigen::MatrixXd time_derivative(const Eigen::MatrixXd& samples, double step);

/// Same stencils applied to a scalar series.
Eigen::VectorXd time_derivative(const Eigen::VectorXd& series, double step);

/// Cumulative trapezoidal integral with value 0 at node 0, row-wise.
Eigen::MatrixXd cumulative_trapezoid(const Eigen::MatrixXd& integrand, double step);

/// Sparse polynomial sum_k c_k prod_i x_i^{e_ki}.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(std::vector<std::vector<int>> exponents, std::vector<double> coefficients);

  Index dim() const noexcept { return dim_; }
  double operator()(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

  /// Quadratic form x^T Q x / 2 as a polynomial.
  static Polynomial quadratic(const Eigen::MatrixXd& q);

 private:
  Index dim_ = 0;
  std::vector<std::vector<int>> exponents_;
  std::vector<double> coefficients_;
};

}  // namespace portsheaf
