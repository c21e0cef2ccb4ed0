#pragma once

#include "portsheaf/trajectory.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace portsheaf {

/// Tag names under which auxiliary potentials ride on extended trajectories.
inline const std::string kAuxHamiltonianTag = "aux_h";
inline const std::string kAuxEntropyTag = "aux_s";

enum class AuxKind { zero, linear, quadratic };

/// Time-varying potential on the port coordinates zeta.
///
///   zero:       H_a(s, zeta) = 0
///   linear:     H_a(s, zeta) = u(s)^T zeta            (curve returns m values)
///   quadratic:  H_a(s, zeta) = kappa(s) zeta^T Q zeta / 2  (curve returns 1 value)
struct AuxHamiltonian {
  AuxKind kind = AuxKind::zero;
  Index m = 0;
  std::function<Eigen::VectorXd(double)> curve;
  Eigen::MatrixXd form;

  static AuxHamiltonian zero(Index m);
  static AuxHamiltonian linear(Index m, std::function<Eigen::VectorXd(double)> u);
  static AuxHamiltonian quadratic(std::function<double(double)> kappa, Eigen::MatrixXd q);

  double value(double s, const Eigen::VectorXd& zeta) const;
  Eigen::VectorXd gradient(double s, const Eigen::VectorXd& zeta) const;

  /// Node samples of the time dependence at e's field times. Throws
  /// StructureViolation when a sample is not finite.
  NodeTag sample_on(const Trajectory& e) const;
};

std::string_view to_string(AuxKind kind) noexcept;

/// Gradient in zeta of a sampled auxiliary potential at a node.
Eigen::VectorXd aux_gradient(const NodeTag& tag, Index node, const Eigen::VectorXd& zeta);
double aux_value(const NodeTag& tag, Index node, const Eigen::VectorXd& zeta);

/// Node-aligned tag for a linear potential whose curve is given by samples
/// (one row per node).
NodeTag linear_tag(const Eigen::MatrixXd& samples);
NodeTag zero_tag(Index nodes);

}  // namespace portsheaf
