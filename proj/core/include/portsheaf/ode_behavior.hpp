#pragma once

#include "portsheaf/errors.hpp"
#include "portsheaf/interval_sheaf.hpp"
#include "portsheaf/trajectory.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace portsheaf {

/// Right-hand side f(s, x) of x' = f(t - shift, x). Must be re-entrant.
struct VectorField {
  Index dim = 0;
  std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> rhs;
  std::string description;

  Eigen::VectorXd operator()(double s, const Eigen::VectorXd& x) const { return rhs(s, x); }
};

struct OdeBehavior {
  VectorField field;
  double step = 1e-3;
  std::string method = "rk4";
  double residual_tolerance = 1e-5;
  std::vector<std::string> labels;
};

/// Any state component above this magnitude ends the integration.
inline constexpr double kBlowUpThreshold = 1e8;

/// Raised by integrate() on finite escape; keeps what was computed.
class BlowUpError : public Error {
 public:
  BlowUpError(Trajectory truncated, double last_valid_time);

  const Trajectory& truncated() const noexcept { return truncated_; }
  double last_valid_time() const noexcept { return last_valid_time_; }

 private:
  Trajectory truncated_;
  double last_valid_time_;
};

/// Classical fixed-step RK4 on g(t, x) = f(t - shift, x) over [0, length].
Trajectory integrate(const VectorField& field, const Eigen::VectorXd& x0, double shift,
                     double length, double h, std::vector<std::string> labels = {});

/// Max over nodes of |D x - rhs_at_node(j)|_inf restricted to the channels
/// [first, first + count), with D the second-order stencils of time_derivative().
double stencil_residual(const Trajectory& e, Index first, Index count,
                        const std::function<Eigen::VectorXd(Index)>& rhs_at_node);

/// Residual of e against x' = f(t - shift, x) at every node.
double membership_residual(const OdeBehavior& behavior, const Trajectory& e);

/// The behaviour as a sheaf: residual membership, exact restriction and an
/// RK4 sampler on the behaviour's grid.
BehaviorSheaf as_behavior_sheaf(const OdeBehavior& behavior);

/// Largest difference quotient |f(s, x) - f(s, y)| / |x - y| over random pairs
/// near the given points. Used for reporting only.
double lipschitz_estimate(const VectorField& field, std::span<const Eigen::VectorXd> points,
                          double s = 0.0, double radius = 1e-3);

// Built-in fields.
VectorField blowup_field();                          // x' = x^2
VectorField linear_field(const Eigen::MatrixXd& a);  // x' = A x
VectorField mass_spring_field(double k, double mass);
VectorField ramp_field();                            // x' = s

}  // namespace portsheaf
