#pragma once

#include "portsheaf/aux_hamiltonian.hpp"
#include "portsheaf/fields.hpp"
#include "portsheaf/machine.hpp"
#include "portsheaf/ode_behavior.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace portsheaf {

/// x' = J grad H + G grad S with J grad S = G grad H = 0, plus port data
/// B, A (n x m) and Jt, Gt (m x m).
struct MetriplecticSystem {
  std::string name = "metriplectic";
  Index n = 0;
  Index m = 0;
  MatrixField J;
  MatrixField G;
  MatrixField B;
  MatrixField A;
  MatrixField Jt;
  MatrixField Gt;
  ScalarField H;
  ScalarField S;
  GradientField grad_h;  ///< optional
  GradientField grad_s;  ///< optional
  std::vector<std::string> state_labels;
  std::vector<std::string> port_labels;

  Eigen::VectorXd gradient_h(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient_s(const Eigen::VectorXd& x) const;

  std::vector<std::string> zeta_labels() const;    // "zeta_<port>"
  std::vector<std::string> input_labels() const;   // "u_<port>"
  std::vector<std::string> tau_labels() const;     // "tau_in_<port>"
  std::vector<std::string> output_labels() const;  // "y_<port>"
  std::vector<std::string> extended_labels() const;
};

/// Free rigid body with a dissipative projector:
///   J = hat(x), S = |x|^2 / 2, H = sum x_i^2 / (2 I_i),
///   G = gamma (1 - gH gH^T / |gH|^2) with gH = grad H (gamma 1 at gH = 0).
/// With a port: m = 1, B(x) = e3 x x (so B^T grad S = 0), A = Jt = Gt = 0.
MetriplecticSystem rigid_body_system(const Eigen::Vector3d& inertia = {1.0, 2.0, 3.0},
                                     double gamma = 0.1, bool with_port = true);

/// Constant structure matrices and polynomial potentials.
MetriplecticSystem linear_metriplectic_system(const Eigen::MatrixXd& j, const Eigen::MatrixXd& g,
                                              const Eigen::MatrixXd& b, const Eigen::MatrixXd& a,
                                              const Eigen::MatrixXd& jt, const Eigen::MatrixXd& gt,
                                              Polynomial h, Polynomial s,
                                              std::string name = "metriplectic");

struct MetriplecticStructure {
  double antisymmetry = 0.0;           ///< J and Jt
  double symmetry = 0.0;               ///< G
  double min_eigenvalue = 0.0;         ///< G
  double extended_min_eigenvalue = 0.0;  ///< [[G, A], [A^T, Gt]]
};

/// Throws StructureViolation naming the failing point.
MetriplecticStructure check_metriplectic_structure(const MetriplecticSystem& sys,
                                                   std::span<const Eigen::VectorXd> points);

struct NoninteractionResiduals {
  double j_grad_s = 0.0;  ///< max |J grad S|
  double g_grad_h = 0.0;  ///< max |G grad H|
  Eigen::VectorXd worst_point;
};

NoninteractionResiduals noninteraction_residuals(const MetriplecticSystem& sys,
                                                 std::span<const Eigen::VectorXd> points);

/// Throws NoninteractionViolation with the worst point when either residual
/// exceeds tolerance.
NoninteractionResiduals check_noninteraction(const MetriplecticSystem& sys,
                                             std::span<const Eigen::VectorXd> points,
                                             double tolerance = 1e-10);

/// x' = J grad H + G grad S, after structure and noninteraction checks.
OdeBehavior closed_metriplectic_behavior(const MetriplecticSystem& sys, double step = 1e-3,
                                         double tolerance = 1e-5);

struct DegeneracyAudit {
  double energy_drift = 0.0;      ///< max |H(x_j) - H(x_0)|
  double max_energy_rate = 0.0;   ///< max |H'| by central differences
  double min_entropy_rate = 0.0;  ///< min S' by central differences
};

DegeneracyAudit degeneracy_audit(const MetriplecticSystem& sys, const Trajectory& e);

/// [[J, B], [-B^T, Jt]] and [[G, A], [A^T, Gt]] on (x, zeta).
std::pair<MatrixField, MatrixField> extended_metriplectic_structure(const MetriplecticSystem& sys);

OdeBehavior extended_metriplectic_behavior(const MetriplecticSystem& sys, const AuxHamiltonian& aux_h,
                                           const AuxHamiltonian& aux_s, double step = 1e-3,
                                           double tolerance = 1e-5);

/// A named algebraic condition and where it is worst.
struct SideCondition {
  std::string name;
  double value = 0.0;
  Index node = 0;
};

/// "Jt grad H_a ≡ 0" and "Gt grad S_a ≡ 0" along an extended trajectory.
std::vector<SideCondition> extended_side_conditions(const MetriplecticSystem& sys,
                                                    const Trajectory& e);

/// Throws ConstraintViolation naming the first condition above tolerance.
void enforce(const std::vector<SideCondition>& conditions, const Trajectory& e, double tolerance);

/// Integrates and tags both potentials, then enforces the side conditions
/// at 1e-8.
Trajectory integrate_extended_metriplectic(const MetriplecticSystem& sys,
                                           const AuxHamiltonian& aux_h,
                                           const AuxHamiltonian& aux_s,
                                           const Eigen::VectorXd& xi0, double shift,
                                           double length, double h);

/// Max of the ODE residual and the side-condition residuals. Throws
/// MissingAuxTag without both tags.
double extended_metriplectic_residual(const MetriplecticSystem& sys, const Trajectory& e);

/// (x, -int_0 (B^T grad H - A^T grad S) dw) with zero potentials.
/// Throws NotAMember for trajectories outside the closed behaviour.
Trajectory embed_metriplectic(const MetriplecticSystem& sys, const Trajectory& e,
                              double tolerance = 1e-5);

/// x' = J grad H + G grad S + B u + A tau,
/// y  = B^T grad H - A^T grad S - Jt u - Gt tau, inputs packed (u, tau_in).
IsoSystem port_metriplectic_system(const MetriplecticSystem& sys);

/// The eight algebraic conditions of the port class along an ISO member.
std::vector<SideCondition> port_conditions(const MetriplecticSystem& sys, const Trajectory& e);

/// ISO machine whose membership residual also includes port_conditions().
Machine port_metriplectic_machine(const MetriplecticSystem& sys, double tolerance = 1e-5,
                                  double step = 1e-3);

Trajectory simulate_port_metriplectic(const MetriplecticSystem& sys, const Eigen::VectorXd& x0,
                                      const InputCurve& u, const InputCurve& tau, double shift,
                                      double length, double h);

struct RateAudit {
  double energy_defect = 0.0;   ///< max |H' - grad H^T (B u + A tau)|
  double entropy_defect = 0.0;  ///< max |S' - grad S^T G grad S - grad S^T (B u + A tau)|
};

RateAudit rate_audit(const MetriplecticSystem& sys, const Trajectory& iso_member);

/// Smallest eigenvalue of [[G, A], [A^T, Gt]] over the nodes of a closed or ISO member.
double extended_psd_along(const MetriplecticSystem& sys, const Trajectory& e);

/// (x, u, tau) -> (x, -int_0 y dw) with linear potentials u^T zeta, tau^T zeta.
SheafMorphism metriplectic_port_embedding(const MetriplecticSystem& sys, double sign = 1.0);

PortControlDiagram metriplectic_diagram(const MetriplecticSystem& sys, double tolerance = 1e-5,
                                        double step = 1e-3);

DiagramReport build_metriplectic_diagram(const MetriplecticSystem& sys,
                                         std::span<const Trajectory> probes,
                                         double tolerance = 1e-5);

std::vector<Trajectory> metriplectic_probes(const MetriplecticSystem& sys, std::size_t count,
                                            std::uint64_t seed, double length,
                                            double step = 1e-3, double shift = 0.0);

}  // namespace portsheaf
