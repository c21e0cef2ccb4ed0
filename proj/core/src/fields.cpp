#include "portsheaf/fields.hpp"

#include "portsheaf/errors.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace portsheaf {

MatrixField constant_field(Eigen::MatrixXd m) {
  return [m = std::move(m)](const Eigen::VectorXd&) { return m; };
}

Eigen::VectorXd finite_difference_gradient(const ScalarField& f, const Eigen::VectorXd& x) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double d = 1e-6 * (1.0 + std::abs(x(i)));
    probe(i) = x(i) + d;
    const double up = f(probe);
    probe(i) = x(i) - d;
    const double down = f(probe);
    probe(i) = x(i);
    g(i) = (up - down) / (2.0 * d);
  }
  return g;
}

double antisymmetry_defect(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return (m + m.transpose()).cwiseAbs().maxCoeff();
}

double symmetry_defect(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

double min_symmetric_eigenvalue(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Eigen::Matrix3d hat(const Eigen::Vector3d& a) {
  Eigen::Matrix3d m;
  m << 0.0, -a(2), a(1),
       a(2), 0.0, -a(0),
      -a(1), a(0), 0.0;
  return m;
}

std::vector<Eigen::VectorXd> probe_points(Index dim, std::size_t count, std::uint64_t seed,
                                          double magnitude) {
  std::mt19937_64 rng(seed);
  // Built from raw engine output so the sequence is identical across standard libraries.
  auto uniform = [&] {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return magnitude * (2.0 * u - 1.0);
  };
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Eigen::VectorXd p(dim);
    for (Index i = 0; i < dim; ++i) p(i) = uniform();
    out.push_back(std::move(p));
  }
  return out;
}

Eigen::MatrixXd time_derivative(const Eigen::MatrixXd& samples, double step) {
  const Index n = samples.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, samples.cols());
  if (n < 2) return d;
  if (n == 2) {
    d.row(0) = (samples.row(1) - samples.row(0)) / step;
    d.row(1) = d.row(0);
    return d;
  }
  const double inv2h = 1.0 / (2.0 * step);
  d.row(0) = (-3.0 * samples.row(0) + 4.0 * samples.row(1) - samples.row(2)) * inv2h;
  for (Index i = 1; i + 1 < n; ++i) {
    d.row(i) = (samples.row(i + 1) - samples.row(i - 1)) * inv2h;
  }
  d.row(n - 1) = (3.0 * samples.row(n - 1) - 4.0 * samples.row(n - 2) + samples.row(n - 3)) * inv2h;
  return d;
}

Eigen::VectorXd time_derivative(const Eigen::VectorXd& series, double step) {
  return time_derivative(Eigen::MatrixXd(series), step).col(0);
}

Eigen::MatrixXd cumulative_trapezoid(const Eigen::MatrixXd& integrand, double step) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(integrand.rows(), integrand.cols());
  for (Index i = 1; i < integrand.rows(); ++i) {
    out.row(i) = out.row(i - 1) + 0.5 * step * (integrand.row(i - 1) + integrand.row(i));
  }
  return out;
}

Polynomial::Polynomial(std::vector<std::vector<int>> exponents, std::vector<double> coefficients)
    : exponents_(std::move(exponents)), coefficients_(std::move(coefficients)) {
  if (exponents_.size() != coefficients_.size()) {
    throw Error(ErrorKind::ConfigError, "polynomial needs one coefficient per monomial");
  }
  dim_ = exponents_.empty() ? 0 : static_cast<Index>(exponents_.front().size());
  for (const auto& e : exponents_) {
    if (static_cast<Index>(e.size()) != dim_) {
      throw Error(ErrorKind::ConfigError, "monomials must share one dimension");
    }
    for (int p : e) {
      if (p < 0) throw Error(ErrorKind::ConfigError, "negative exponent in polynomial");
    }
  }
}

double Polynomial::operator()(const Eigen::VectorXd& x) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < exponents_.size(); ++k) {
    double term = coefficients_[k];
    for (Index i = 0; i < dim_; ++i) term *= std::pow(x(i), exponents_[k][static_cast<std::size_t>(i)]);
    sum += term;
  }
  return sum;
}

Eigen::VectorXd Polynomial::gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim_);
  for (std::size_t k = 0; k < exponents_.size(); ++k) {
    const auto& e = exponents_[k];
    for (Index j = 0; j < dim_; ++j) {
      const int pj = e[static_cast<std::size_t>(j)];
      if (pj == 0) continue;
      double term = coefficients_[k] * pj * std::pow(x(j), pj - 1);
      for (Index i = 0; i < dim_; ++i) {
        if (i != j) term *= std::pow(x(i), e[static_cast<std::size_t>(i)]);
      }
      g(j) += term;
    }
  }
  return g;
}

Polynomial Polynomial::quadratic(const Eigen::MatrixXd& q) {
  const Index n = q.rows();
  std::vector<std::vector<int>> exps;
  std::vector<double> coeffs;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      const double c = (i == j) ? 0.5 * q(i, i) : 0.5 * (q(i, j) + q(j, i));
      if (c == 0.0) continue;
      std::vector<int> e(static_cast<std::size_t>(n), 0);
      e[static_cast<std::size_t>(i)] += 1;
      e[static_cast<std::size_t>(j)] += 1;
      exps.push_back(std::move(e));
      coeffs.push_back(c);
    }
  }
  Polynomial p(std::move(exps), std::move(coeffs));
  p.dim_ = n;
  return p;
}

}  // namespace portsheaf
