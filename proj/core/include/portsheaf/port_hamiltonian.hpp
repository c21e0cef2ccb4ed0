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

/// x' = (J(x) - R(x)) grad H(x) + B(x) u,  y = B(x)^T grad H(x).
struct PHSystem {
  std::string name = "ph";
  Index n = 0;
  Index m = 0;
  MatrixField J;
  MatrixField R;
  MatrixField B;
  ScalarField H;
  /// Optional; central differences of H are used when empty.
  GradientField grad_h;
  std::vector<std::string> state_labels;
  std::vector<std::string> port_labels;

  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

  std::vector<std::string> zeta_labels() const;    // "zeta_<port>"
  std::vector<std::string> input_labels() const;   // "u_<port>"
  std::vector<std::string> output_labels() const;  // "y_<port>"
  std::vector<std::string> extended_labels() const;  // states, then zeta
};

/// k q^2 / 2 + p^2 / (2 mass), force port on p.
PHSystem mass_spring_system(double k = 1.0, double mass = 1.0);

/// Constant J, R, B and a polynomial Hamiltonian.
PHSystem linear_ph_system(const Eigen::MatrixXd& j, const Eigen::MatrixXd& r,
                          const Eigen::MatrixXd& b, Polynomial h, std::string name = "ph");

struct StructureReport {
  double antisymmetry = 0.0;
  double symmetry = 0.0;
  double min_eigenvalue = 0.0;
  double gradient_error = 0.0;
};

/// Checks J antisymmetric, R symmetric PSD (1e-10) and grad H against finite
/// differences (1e-5 relative) at every point. Throws StructureViolation with
/// the failing point.
StructureReport check_ph_structure(const PHSystem& sys, std::span<const Eigen::VectorXd> points);

/// Probe points used by the constructors below.
std::vector<Eigen::VectorXd> structure_probes(Index dim, std::uint64_t seed = 0x5eed);

/// x' = (J - R) grad H.
OdeBehavior closed_behavior(const PHSystem& sys, double step = 1e-3, double tolerance = 1e-5);

/// Block fields [[J, B], [-B^T, 0]] and [[R, 0], [0, 0]] on (x, zeta).
std::pair<MatrixField, MatrixField> extended_structure(const PHSystem& sys);

/// xi' = (Jx - Rx)(xi) [grad H(x); grad_zeta H_a(t - shift, zeta)].
OdeBehavior extended_behavior(const PHSystem& sys, const AuxHamiltonian& aux, double step = 1e-3,
                              double tolerance = 1e-5);

/// Integrates the extended behaviour and attaches the aux tag.
Trajectory integrate_extended(const PHSystem& sys, const AuxHamiltonian& aux,
                              const Eigen::VectorXd& xi0, double shift, double length, double h);

/// Residual of an extended trajectory, reading H_a from its tag.
/// Throws MissingAuxTag when the tag is absent.
double extended_residual(const PHSystem& sys, const Trajectory& e);

/// Extended behaviour as a sheaf; its sampler uses the zero potential.
BehaviorSheaf enclosing_sheaf(const PHSystem& sys, double tolerance = 1e-5, double step = 1e-3);

/// (x, -int_0 B^T grad H dw) with zero aux. Throws NotAMember if e is not in
/// the closed behaviour within tolerance.
Trajectory embed_closed(const PHSystem& sys, const Trajectory& e, double tolerance = 1e-5);

/// a_leg: grad_zeta H_a along the trajectory; e_leg: -d/dt zeta.
std::pair<SheafMorphism, SheafMorphism> projections(const PHSystem& sys);

/// The input-state-output system with input u and output B^T grad H.
IsoSystem ph_iso_system(const PHSystem& sys);
Machine ph_iso_machine(const PHSystem& sys, double tolerance = 1e-5, double step = 1e-3);

/// Node-wise chain-rule check on an ISO member (x, u), H' by central
/// differences.
struct PowerAudit {
  double balance_defect = 0.0;  ///< max |H' - y^T u + gradH^T R gradH|
  double supply_excess = 0.0;   ///< max (H' - y^T u)
};
PowerAudit power_balance_audit(const PHSystem& sys, const Trajectory& iso_member);

struct EnergyAudit {
  double max_drift = 0.0;     ///< max |H(x_j) - H(x_0)|
  double max_increase = 0.0;  ///< max (H(x_{j+1}) - H(x_j)); 0 for a single node
};
EnergyAudit energy_audit(const ScalarField& h, const Trajectory& e, Index first = 0, Index count = -1);

/// (x, u) -> (x, -int_0 y dw) with the linear potential u^T zeta.
/// sign = -1 reproduces a corrupted quadrature for negative tests.
SheafMorphism port_embedding(const PHSystem& sys, double sign = 1.0);

/// Closed, enclosing and port machines with Psi, Xi and (A, id, id).
PortControlDiagram ph_diagram(const PHSystem& sys, double tolerance = 1e-5, double step = 1e-3);

DiagramReport build_ph_diagram(const PHSystem& sys, std::span<const Trajectory> probes,
                               double tolerance = 1e-5);

/// Closed members from seeded initial states in [-2, 2]^n.
std::vector<Trajectory> closed_probes(const PHSystem& sys, std::size_t count, std::uint64_t seed,
                                      double length, double step = 1e-3, double shift = 0.0);

/// Token of the one-point sheaf paired with a closed machine, and its canonical
/// inclusion into an m-channel port sheaf as the zero curve.
SheafMorphism constant_leg();
SheafMorphism zero_port(Index m, std::vector<std::string> labels);

}  // namespace portsheaf
