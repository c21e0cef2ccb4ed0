#pragma once

#include "portsheaf/interval_sheaf.hpp"
#include "portsheaf/ode_behavior.hpp"
#include "portsheaf/trajectory.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace portsheaf {

/// A morphism of interval sheaves, applied element-wise. Implementations must
/// preserve length and shift and commute with restriction.
using SheafMorphism = std::function<Trajectory(const Trajectory&)>;

SheafMorphism identity_map();

/// Which projection of a machine: the A-leg or the E-leg.
enum class Leg { a, e };

/// A behaviour sheaf together with its two projections.
struct Machine {
  std::string name;
  BehaviorSheaf behavior;
  SheafMorphism a_leg;
  SheafMorphism e_leg;
  std::vector<std::string> a_labels;
  std::vector<std::string> e_labels;
  /// Sup-norm bound for leg(restrict(e)) vs restrict(leg(e)). Legs that
  /// differentiate numerically switch stencils at the ends of a restricted
  /// trajectory, so they carry an O(h^2) bound instead of the default.
  double naturality_tolerance = 1e-9;

  const SheafMorphism& leg(Leg which) const { return which == Leg::a ? a_leg : e_leg; }
};

/// Max over probes and grid-aligned sub-intervals of the restriction/leg
/// commutation defect for both legs.
double leg_naturality_defect(const Machine& machine, std::span<const Trajectory> probes);

/// Validates leg naturality on the probes; throws StructureViolation when
/// either leg exceeds machine.naturality_tolerance or changes length/shift.
void check_machine(const Machine& machine, std::span<const Trajectory> probes);

/// The machine with A- and E-legs exchanged.
Machine swap_legs(const Machine& machine);

enum class Variant {
  straight,  ///< eta: E -> E', alpha: A -> A'
  swapped,   ///< eta: E -> A', alpha: A -> E'
};

struct MachineMorphism {
  std::string name;
  SheafMorphism beta;
  SheafMorphism eta;
  SheafMorphism alpha;
  Variant variant = Variant::straight;
};

MachineMorphism identity_morphism(Variant variant = Variant::straight);

/// outer . inner. Swapped parts route through the opposite leg of the middle
/// machine, so the variant of the composite is the parity of the two.
MachineMorphism compose(const MachineMorphism& outer, const MachineMorphism& inner);

/// Commutativity defect of phi : src -> dst over the probes (see Variant).
/// Throws NotAMember for probes outside src.
double morphism_defect(const MachineMorphism& phi, const Machine& src, const Machine& dst,
                       std::span<const Trajectory> probes);

/// Largest dst membership residual of beta(e) over the probes.
double image_residual(const MachineMorphism& phi, const Machine& dst,
                      std::span<const Trajectory> probes);

struct ProbeResult {
  double separation = 0.0;
  double min_image_distance = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> collisions;
  /// Pairs of inputs closer than `separation` (precondition violations).
  std::size_t close_inputs = 0;

  /// Empty collision list: evidence of injectivity on the probe set, not a proof.
  bool evidence_of_injectivity() const { return collisions.empty(); }
};

/// Reports pairs whose images are closer than separation * 1e-3.
ProbeResult injectivity_probe(const SheafMorphism& map, std::span<const Trajectory> probes,
                              double separation);

/// Smallest pairwise sup-distance of the probes (+inf for fewer than two).
double min_pairwise_distance(std::span<const Trajectory> probes);

// ---------------------------------------------------------------------------
// Input-state-output machines
// ---------------------------------------------------------------------------

/// x' = f(t - shift, x, u), y = g(t - shift, x, u). Members are packed as
/// n + m channel trajectories (states, then inputs).
struct IsoSystem {
  Index n = 0;
  Index m = 0;
  Index p = 0;
  std::function<Eigen::VectorXd(double, const Eigen::VectorXd&, const Eigen::VectorXd&)> f;
  std::function<Eigen::VectorXd(double, const Eigen::VectorXd&, const Eigen::VectorXd&)> g;
  std::vector<std::string> state_labels;
  std::vector<std::string> input_labels;
  std::vector<std::string> output_labels;
  std::string description;
};

/// Input curve in field time.
using InputCurve = std::function<Eigen::VectorXd(double)>;

/// Integrates the ISO system under the given input and packs (x, u).
Trajectory simulate_iso(const IsoSystem& sys, const Eigen::VectorXd& x0, const InputCurve& input,
                        double shift, double length, double h);

/// Residual of the state channels only; inputs are free.
double iso_residual(const IsoSystem& sys, const Trajectory& e);

/// Output channels g evaluated node-wise.
Trajectory iso_output(const IsoSystem& sys, const Trajectory& e);

/// ISO machine: A-leg extracts (u, shift), E-leg evaluates (g, shift). The
/// sampler integrates with zero input. Legs are checked for naturality on a
/// few sampled members before returning.
Machine iso_machine(const IsoSystem& sys, double tolerance = 1e-5, double step = 1e-3);

// ---------------------------------------------------------------------------
// Port-control diagram
// ---------------------------------------------------------------------------

struct NamedDefect {
  std::string name;
  std::size_t probe = 0;
  double value = 0.0;
};

struct InjectivityEntry {
  std::string map;
  ProbeResult result;
};

struct DiagramReport {
  double tolerance = 0.0;
  std::vector<NamedDefect> defects;
  std::vector<InjectivityEntry> injectivity;
  std::vector<std::string> notes;
  bool pass = false;

  /// Largest defect per name.
  std::vector<std::pair<std::string, double>> worst_by_name() const;
  double max_defect() const;
};

struct DiagramOptions {
  double tolerance = 1e-5;
  /// Which leg of the closed machine lands in the constant sheaf.
  Leg constant_leg = Leg::a;
};

/// Checks that closed -(psi)-> port -(xi)-> enclosing commutes with
/// closed -(a_phi)-> enclosing, that every morphism commutes with the legs,
/// lands inside its target behaviour, and separates the probes.
/// Throws NotAMember for probes outside closed, NotClosed when the constant
/// leg is not constant across probes and times.
DiagramReport verify_port_control_diagram(const Machine& closed, const Machine& enclosing,
                                          const Machine& port, const MachineMorphism& psi,
                                          const MachineMorphism& xi, const MachineMorphism& a_phi,
                                          std::span<const Trajectory> probes,
                                          const DiagramOptions& options = {});

/// The five pieces of a port-control diagram, bundled for reuse.
struct PortControlDiagram {
  Machine closed;
  Machine enclosing;
  Machine port;
  MachineMorphism psi;
  MachineMorphism xi;
  MachineMorphism a_phi;
  DiagramOptions options;

  DiagramReport verify(std::span<const Trajectory> probes) const {
    return verify_port_control_diagram(closed, enclosing, port, psi, xi, a_phi, probes, options);
  }
};

nlohmann::json to_json(const DiagramReport& report);

}  // namespace portsheaf
