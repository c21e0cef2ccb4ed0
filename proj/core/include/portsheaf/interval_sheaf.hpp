#pragma once

#include "portsheaf/trajectory.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace portsheaf {

// ---------------------------------------------------------------------------
// The interval category: objects are lengths, a morphism a -> b is an offset
// in [0, b - a] placing the shorter interval inside the longer one.
// ---------------------------------------------------------------------------

/// Relative tolerance for deciding that a real number sits on a grid node.
inline constexpr double kGridTolerance = 1e-12;

class IntObject {
 public:
  explicit IntObject(double length);
  double length() const noexcept { return length_; }

 private:
  double length_;
};

class IntMorphism {
 public:
  /// Throws EmptyHom when offset is outside [0, target - source].
  IntMorphism(IntObject source, IntObject target, double offset);

  static IntMorphism identity(IntObject object) { return {object, object, 0.0}; }

  IntObject source() const noexcept { return source_; }
  IntObject target() const noexcept { return target_; }
  double offset() const noexcept { return offset_; }

 private:
  IntObject source_;
  IntObject target_;
  double offset_;
};

/// outer . inner; offsets add. Throws DomainMismatch if inner.target != outer.source.
IntMorphism compose_int(const IntMorphism& outer, const IntMorphism& inner);

/// Grid index of x for step h, or nullopt when x is not a node (relative
/// tolerance kGridTolerance).
std::optional<Index> grid_index(double x, double h);

// ---------------------------------------------------------------------------
// Restriction and gluing
// ---------------------------------------------------------------------------

/// Restriction to [offset, offset + new_length], re-based at 0, shift reduced
/// by offset. Exact index arithmetic; offsets must sit on grid nodes.
Trajectory restrict(const Trajectory& e, double new_length, double offset);

/// Restriction along an Int morphism a -> b, for e of length b.
Trajectory restrict(const Trajectory& e, const IntMorphism& m);

/// Restriction onto nodes offset + j h by cubic Lagrange interpolation.
/// Accepts misaligned offsets; not part of the exact sheaf laws.
Trajectory restrict_resampled(const Trajectory& e, double new_length, double offset);

/// Concatenate left on [0, a] and right on [0, b] into a trajectory on
/// [0, a + b]. The junction node is taken from left.
Trajectory glue(const Trajectory& left, const Trajectory& right, double tolerance = 1e-9);

// ---------------------------------------------------------------------------
// Behaviour sheaves and the two axioms
// ---------------------------------------------------------------------------

using MembershipFn = std::function<double(const Trajectory&)>;
using RestrictFn = std::function<Trajectory(const Trajectory&, double, double)>;
/// (initial data, length, shift) -> member.
using SamplerFn = std::function<Trajectory(const Eigen::VectorXd&, double, double)>;

struct BehaviorSheaf {
  std::string name;
  MembershipFn membership;
  RestrictFn restrict_map;
  SamplerFn sampler;
  double tolerance = 1e-9;

  double residual(const Trajectory& e) const { return membership(e); }
  bool contains(const Trajectory& e) const { return membership(e) <= tolerance; }
  Trajectory restrict(const Trajectory& e, double new_length, double offset) const;
};

/// Axiom results for one probe and one cut point.
struct AxiomCheck {
  std::size_t probe = 0;
  double cut = 0.0;
  /// glue(restrict(e, cut, 0), restrict(e, len - cut, cut)) == e bit-exactly.
  bool glue_exact = false;
  double glue_residual = 0.0;
  bool glue_member = false;
  /// Other members that agree with e on both pieces within tolerance.
  std::size_t separation_candidates = 0;
  /// Candidates that agree on both pieces but differ from e overall.
  std::size_t separation_violations = 0;
};

struct AxiomReport {
  double tolerance = 0.0;
  std::vector<AxiomCheck> checks;

  bool pass() const;
  std::size_t separation_violations() const;
  std::size_t gluing_failures() const;
};

/// Runs separation and gluing on every probe and every cut interior to it.
/// Throws NotAMember when a probe fails membership.
AxiomReport check_sheaf_axioms(const BehaviorSheaf& sheaf, std::span<const Trajectory> probes,
                               std::span<const double> cut_points);

/// Restriction functoriality defect: restrict twice vs restrict once.
/// Returns true when restrict(restrict(e, t0, tau), s, sigma) is bit-identical
/// to restrict(e, s, tau + sigma).
bool restriction_functorial(const Trajectory& e, double t0, double tau, double s, double sigma);

/// The sheaf assigning the same finite token set {0, ..., size - 1} to every
/// interval, with identity restrictions on tokens.
BehaviorSheaf constant_sheaf(int value_set_size);

}  // namespace portsheaf
