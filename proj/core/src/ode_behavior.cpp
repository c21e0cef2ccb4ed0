#include "portsheaf/ode_behavior.hpp"

#include "portsheaf/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace portsheaf {

namespace {

std::string describe_blowup(double t) {
  std::ostringstream os;
  os.precision(17);
  os << "state left the threshold after t = " << t;
  return os.str();
}

bool escaped(const Eigen::VectorXd& x) {
  for (Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x(i)) || std::abs(x(i)) > kBlowUpThreshold) return true;
  }
  return false;
}

}  // namespace

BlowUpError::BlowUpError(Trajectory truncated, double last_valid_time)
    : Error(ErrorKind::BlowUp, describe_blowup(last_valid_time)),
      truncated_(std::move(truncated)),
      last_valid_time_(last_valid_time) {}

Trajectory integrate(const VectorField& field, const Eigen::VectorXd& x0, double shift,
                     double length, double h, std::vector<std::string> labels) {
  if (x0.size() != field.dim) {
    throw Error(ErrorKind::DimensionMismatch, "initial value has dimension " +
                                                  std::to_string(x0.size()) + ", field " +
                                                  std::to_string(field.dim));
  }
  if (!(h > 0.0)) throw Error(ErrorKind::GridMismatch, "step must be positive");
  if (!(length >= 0.0)) throw Error(ErrorKind::OutOfRange, "length must be nonnegative");
  const auto steps = grid_index(length, h);
  if (!steps) throw Error(ErrorKind::MisalignedOffset, "length is not a multiple of the step");
  if (labels.empty()) labels = indexed_labels("x", field.dim);

  Eigen::MatrixXd values(*steps + 1, field.dim);
  values.row(0) = x0.transpose();
  Eigen::VectorXd x = x0;
  // Compensated (Kahan) accumulation of the increments: at fine steps the rounding of
  // x + dx otherwise swamps the O(h^4) truncation error.
  Eigen::VectorXd carry = Eigen::VectorXd::Zero(field.dim);
  // Field time at node j is j h - shift; matches Trajectory::field_time for a fresh anchor.
  for (Index j = 0; j < *steps; ++j) {
    const double s = static_cast<double>(j) * h - shift;
    const Eigen::VectorXd k1 = field(s, x);
    const Eigen::VectorXd k2 = field(s + 0.5 * h, x + 0.5 * h * k1);
    const Eigen::VectorXd k3 = field(s + 0.5 * h, x + 0.5 * h * k2);
    const Eigen::VectorXd k4 = field(s + h, x + h * k3);
    const Eigen::VectorXd dx = (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4) - carry;
    const Eigen::VectorXd next = x + dx;
    if (escaped(next)) {
      Trajectory truncated(h, shift, values.topRows(j + 1), labels);
      throw BlowUpError(std::move(truncated), static_cast<double>(j) * h);
    }
    carry = (next - x) - dx;
    x = next;
    values.row(j + 1) = x.transpose();
  }
  return Trajectory(h, shift, std::move(values), std::move(labels));
}

double stencil_residual(const Trajectory& e, Index first, Index count,
                        const std::function<Eigen::VectorXd(Index)>& rhs_at_node) {
  if (first < 0 || first + count > e.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "residual channels outside the trajectory");
  }
  if (count == 0) return 0.0;
  const Eigen::MatrixXd d = time_derivative(Eigen::MatrixXd(e.values().middleCols(first, count)), e.step());
  double worst = 0.0;
  for (Index j = 0; j < e.nodes(); ++j) {
    const Eigen::VectorXd f = rhs_at_node(j);
    if (f.size() != count) {
      throw Error(ErrorKind::DimensionMismatch, "field returned " + std::to_string(f.size()) +
                                                    " components, expected " +
                                                    std::to_string(count));
    }
    const double r = (d.row(j).transpose() - f).cwiseAbs().maxCoeff();
    if (!(r <= worst)) worst = std::isnan(r) ? std::numeric_limits<double>::infinity() : r;
  }
  return worst;
}

double membership_residual(const OdeBehavior& behavior, const Trajectory& e) {
  if (e.dim() != behavior.field.dim) {
    throw Error(ErrorKind::DimensionMismatch, "trajectory has " + std::to_string(e.dim()) +
                                                  " channels, field " +
                                                  std::to_string(behavior.field.dim));
  }
  const double ratio = e.step() / behavior.step;
  if (!grid_index(ratio, 1.0) || ratio < 1.0 - kGridTolerance) {
    throw Error(ErrorKind::GridMismatch, "trajectory step is not a multiple of the behaviour step");
  }
  return stencil_residual(e, 0, e.dim(), [&](Index j) {
    return behavior.field(e.field_time(j), e.value(j));
  });
}

BehaviorSheaf as_behavior_sheaf(const OdeBehavior& behavior) {
  BehaviorSheaf sheaf;
  sheaf.name = behavior.field.description;
  sheaf.tolerance = behavior.residual_tolerance;
  sheaf.membership = [behavior](const Trajectory& e) { return membership_residual(behavior, e); };
  sheaf.sampler = [behavior](const Eigen::VectorXd& x0, double length, double shift) {
    return integrate(behavior.field, x0, shift, length, behavior.step, behavior.labels);
  };
  return sheaf;
}

double lipschitz_estimate(const VectorField& field, std::span<const Eigen::VectorXd> points,
                          double s, double radius) {
  double worst = 0.0;
  std::uint64_t seed = 0x5eed;
  for (const auto& p : points) {
    const auto offsets = probe_points(p.size(), 4, seed++, radius);
    const Eigen::VectorXd fp = field(s, p);
    for (const auto& d : offsets) {
      const double dist = d.cwiseAbs().maxCoeff();
      if (dist == 0.0) continue;
      worst = std::max(worst, (field(s, p + d) - fp).cwiseAbs().maxCoeff() / dist);
    }
  }
  return worst;
}

VectorField blowup_field() {
  return {1, [](double, const Eigen::VectorXd& x) { return Eigen::VectorXd(x.array().square()); },
          "blowup: x' = x^2"};
}

VectorField linear_field(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::DimensionMismatch, "linear field needs a square matrix");
  return {a.rows(), [a](double, const Eigen::VectorXd& x) { return Eigen::VectorXd(a * x); },
          "linear: x' = A x"};
}

VectorField mass_spring_field(double k, double mass) {
  return {2,
          [k, mass](double, const Eigen::VectorXd& x) {
            Eigen::VectorXd d(2);
            d << x(1) / mass, -k * x(0);
            return d;
          },
          "mass_spring: (q, p)' = (p / m, -k q)"};
}

VectorField ramp_field() {
  return {1, [](double s, const Eigen::VectorXd&) { return Eigen::VectorXd::Constant(1, s); },
          "ramp: x' = t"};
}

}  // namespace portsheaf
