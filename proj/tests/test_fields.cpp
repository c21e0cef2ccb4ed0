#include "test_util.hpp"

#include "portsheaf/fields.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace portsheaf {
namespace {

TEST(Fields, FiniteDifferenceGradient) {
  const ScalarField f = [](const Eigen::VectorXd& x) { return std::sin(x(0)) * x(1) * x(1); };
  const Eigen::Vector2d x(0.3, -1.2);
  const Eigen::VectorXd g = finite_difference_gradient(f, x);
  EXPECT_NEAR(g(0), std::cos(0.3) * 1.44, 1e-8);
  EXPECT_NEAR(g(1), 2 * std::sin(0.3) * -1.2, 1e-8);
}

TEST(Fields, MatrixDefects) {
  Eigen::Matrix2d j;
  j << 0, 1, -1, 0;
  EXPECT_EQ(antisymmetry_defect(j), 0.0);
  EXPECT_EQ(symmetry_defect(j), 2.0);
  Eigen::Matrix2d r;
  r << 2, 0, 0, -0.5;
  EXPECT_DOUBLE_EQ(min_symmetric_eigenvalue(r), -0.5);
  EXPECT_TRUE(std::isinf(min_symmetric_eigenvalue(Eigen::MatrixXd(0, 0))));
}

TEST(Fields, HatIsCrossProduct) {
  const Eigen::Vector3d a(1, -2, 0.5), b(0.3, 4, -1);
  EXPECT_LT((hat(a) * b - a.cross(b)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(antisymmetry_defect(hat(a)), 0.0);
}

TEST(Fields, ProbePointsAreDeterministicAndBounded) {
  const auto p = probe_points(3, 20, 42, 2.0);
  const auto q = probe_points(3, 20, 42, 2.0);
  ASSERT_EQ(p.size(), 20u);
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_EQ(p[i], q[i]);
    EXPECT_LE(p[i].cwiseAbs().maxCoeff(), 2.0);
  }
  EXPECT_NE(probe_points(3, 1, 43)[0], p[0]);
}

TEST(Fields, TimeDerivativeIsSecondOrderExactOnQuadratics) {
  const double h = 0.1;
  Eigen::VectorXd s(6);
  for (Index j = 0; j < 6; ++j) s(j) = 3.0 * (j * h) * (j * h) - j * h + 2.0;
  const Eigen::VectorXd d = time_derivative(s, h);
  for (Index j = 0; j < 6; ++j) EXPECT_NEAR(d(j), 6.0 * j * h - 1.0, 1e-12);
  Eigen::VectorXd two(2);
  two << 1.0, 2.0;
  EXPECT_DOUBLE_EQ(time_derivative(two, 0.5)(0), 2.0);
  EXPECT_EQ(time_derivative(Eigen::VectorXd(Eigen::VectorXd::Ones(1)), 0.5)(0), 0.0);
}

TEST(Fields, CumulativeTrapezoid) {
  const double h = 0.25;
  Eigen::MatrixXd f(5, 1);
  for (Index j = 0; j < 5; ++j) f(j, 0) = 2.0 * j * h;  // integral t^2, exact for linear
  const Eigen::MatrixXd c = cumulative_trapezoid(f, h);
  for (Index j = 0; j < 5; ++j) EXPECT_NEAR(c(j, 0), (j * h) * (j * h), 1e-15);
}

TEST(Fields, PolynomialValueAndGradient) {
  const Polynomial p({{2, 0}, {1, 1}, {0, 0}}, {1.5, -2.0, 4.0});
  const Eigen::Vector2d x(2.0, -1.0);
  EXPECT_DOUBLE_EQ(p(x), 1.5 * 4 + 4.0 + 4.0);
  const Eigen::VectorXd g = p.gradient(x);
  EXPECT_DOUBLE_EQ(g(0), 3.0 * 2 + 2.0);
  EXPECT_DOUBLE_EQ(g(1), -4.0);

  Eigen::Matrix2d q;
  q << 2, 1, 1, 3;
  const Polynomial quad = Polynomial::quadratic(q);
  EXPECT_NEAR(quad(x), 0.5 * x.dot(q * x), 1e-14);
  EXPECT_LT((quad.gradient(x) - q * x).cwiseAbs().maxCoeff(), 1e-14);

  EXPECT_ERROR_KIND(Polynomial({{1, 0}, {1}}, {1.0, 1.0}), ErrorKind::ConfigError);
  EXPECT_ERROR_KIND(Polynomial({{1}}, {1.0, 2.0}), ErrorKind::ConfigError);
}

}  // namespace
}  // namespace portsheaf
