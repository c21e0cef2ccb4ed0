#include "portsheaf/interval_sheaf.hpp"

#include "portsheaf/errors.hpp"
#include "trajectory_access.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace portsheaf {

namespace {

bool near_equal(double a, double b) {
  return std::abs(a - b) <= kGridTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

IntObject::IntObject(double length) : length_(length) {
  if (!(length >= 0.0) || !std::isfinite(length)) {
    throw Error(ErrorKind::OutOfRange, "interval length must be a finite nonnegative real");
  }
}

IntMorphism::IntMorphism(IntObject source, IntObject target, double offset)
    : source_(source), target_(target), offset_(offset) {
  const double room = target.length() - source.length();
  const double slack = kGridTolerance * std::max(1.0, target.length());
  if (room < -slack || !(offset >= -slack) || offset > room + slack) {
    throw Error(ErrorKind::EmptyHom, "Hom(" + fmt(source.length()) + ", " +
                                         fmt(target.length()) + ") does not contain " +
                                         fmt(offset));
  }
}

IntMorphism compose_int(const IntMorphism& outer, const IntMorphism& inner) {
  if (!near_equal(inner.target().length(), outer.source().length())) {
    throw Error(ErrorKind::DomainMismatch, "inner target " + fmt(inner.target().length()) +
                                               " != outer source " +
                                               fmt(outer.source().length()));
  }
  return IntMorphism(inner.source(), outer.target(), outer.offset() + inner.offset());
}

std::optional<Index> grid_index(double x, double h) {
  if (!std::isfinite(x) || !(h > 0.0)) return std::nullopt;
  const double q = x / h;
  const double k = std::round(q);
  if (std::abs(q - k) > kGridTolerance * std::max(1.0, std::abs(q))) return std::nullopt;
  return static_cast<Index>(k);
}

Trajectory restrict(const Trajectory& e, double new_length, double offset) {
  const double h = e.step();
  if (new_length < 0.0 || offset < 0.0 ||
      new_length + offset > e.length() + kGridTolerance * std::max(1.0, e.length())) {
    throw Error(ErrorKind::OutOfRange, "cannot restrict length " + fmt(e.length()) + " to [" +
                                           fmt(offset) + ", " + fmt(offset + new_length) + "]");
  }
  const auto k_off = grid_index(offset, h);
  const auto k_len = grid_index(new_length, h);
  if (!k_off || !k_len) {
    throw Error(ErrorKind::MisalignedOffset, "offset " + fmt(offset) + " / length " +
                                                 fmt(new_length) + " not on grid of step " +
                                                 fmt(h));
  }
  if (*k_off + *k_len > e.last()) {
    throw Error(ErrorKind::OutOfRange, "restriction runs past the last node");
  }
  return e.slice(*k_off, *k_len + 1);
}

Trajectory restrict(const Trajectory& e, const IntMorphism& m) {
  if (!near_equal(e.length(), m.target().length())) {
    throw Error(ErrorKind::DomainMismatch, "trajectory length " + fmt(e.length()) +
                                               " is not the morphism target " +
                                               fmt(m.target().length()));
  }
  return restrict(e, m.source().length(), m.offset());
}

Trajectory restrict_resampled(const Trajectory& e, double new_length, double offset) {
  const double h = e.step();
  if (new_length < 0.0 || offset < 0.0 ||
      new_length + offset > e.length() + kGridTolerance * std::max(1.0, e.length())) {
    throw Error(ErrorKind::OutOfRange, "resampled restriction outside the trajectory");
  }
  const auto k_len = grid_index(new_length, h);
  if (!k_len) {
    throw Error(ErrorKind::MisalignedOffset, "resampled length must be a multiple of the step");
  }
  const Index nodes = *k_len + 1;
  const Index last = e.last();

  // Weights of the cubic through nodes base-1 .. base+2 (clamped to the grid).
  auto interpolate_rows = [&](const Eigen::MatrixXd& src, double t) -> Eigen::RowVectorXd {
    if (last == 0) return src.row(0);
    const double q = std::clamp(t / h, 0.0, static_cast<double>(last));
    Index base = static_cast<Index>(std::floor(q));
    Index lo = std::clamp<Index>(base - 1, 0, std::max<Index>(0, last - 3));
    Index hi = std::min<Index>(lo + 3, last);
    Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(src.cols());
    for (Index i = lo; i <= hi; ++i) {
      double w = 1.0;
      for (Index j = lo; j <= hi; ++j) {
        if (j != i) w *= (q - static_cast<double>(j)) / static_cast<double>(i - j);
      }
      out += w * src.row(i);
    }
    return out;
  };

  Eigen::MatrixXd values(nodes, e.dim());
  for (Index j = 0; j < nodes; ++j) {
    values.row(j) = interpolate_rows(e.values(), offset + static_cast<double>(j) * h);
  }
  Trajectory out(h, e.shift() - offset, std::move(values), e.labels());
  TrajectoryAccess::set_token(out, e.token_id());
  for (const auto& [name, tag] : e.tags()) {
    NodeTag t = tag;
    t.samples.resize(nodes, tag.samples.cols());
    for (Index j = 0; j < nodes; ++j) {
      t.samples.row(j) = interpolate_rows(tag.samples, offset + static_cast<double>(j) * h);
    }
    out.set_tag(name, std::move(t));
  }
  return out;
}

Trajectory glue(const Trajectory& left, const Trajectory& right, double tolerance) {
  if (!near_equal(left.step(), right.step())) {
    throw Error(ErrorKind::GridMismatch, "steps differ: " + fmt(left.step()) + " vs " +
                                             fmt(right.step()));
  }
  if (left.dim() != right.dim() || left.labels() != right.labels()) {
    throw Error(ErrorKind::GridMismatch, "channel layouts differ");
  }
  if (left.tags().size() != right.tags().size()) {
    throw Error(ErrorKind::GridMismatch, "tag sets differ");
  }
  for (const auto& [name, tag] : left.tags()) {
    const NodeTag* other = right.tag(name);
    if (other == nullptr || other->kind != tag.kind ||
        other->samples.cols() != tag.samples.cols() || other->fixed.rows() != tag.fixed.rows() ||
        other->fixed.cols() != tag.fixed.cols() || (other->fixed.array() != tag.fixed.array()).any()) {
      throw Error(ErrorKind::GridMismatch, "tag '" + name + "' differs between pieces");
    }
  }

  const double shift_defect = std::abs(right.shift() - (left.shift() - left.length()));
  if (!(shift_defect <= tolerance)) {
    throw Error(ErrorKind::ShiftMismatch, "right shift " + fmt(right.shift()) +
                                              " != left shift - left length " +
                                              fmt(left.shift() - left.length()));
  }

  if (left.token_id() != right.token_id()) {
    throw Error(ErrorKind::JunctionMismatch, "pieces carry different tokens");
  }
  double junction = 0.0;
  if (left.dim() > 0) {
    junction = (left.values().row(left.last()) - right.values().row(0)).cwiseAbs().maxCoeff();
  }
  for (const auto& [name, tag] : left.tags()) {
    if (tag.samples.cols() == 0) continue;
    const NodeTag* other = right.tag(name);
    junction = std::max(junction, (tag.samples.row(tag.samples.rows() - 1) - other->samples.row(0))
                                      .cwiseAbs()
                                      .maxCoeff());
  }
  if (!(junction <= tolerance)) {
    throw Error(ErrorKind::JunctionMismatch, "endpoint defect " + fmt(junction) +
                                                 " exceeds tolerance " + fmt(tolerance));
  }

  const Index extra = right.nodes() - 1;
  Trajectory out = left;
  auto& values = TrajectoryAccess::values(out);
  values.conservativeResize(left.nodes() + extra, Eigen::NoChange);
  if (extra > 0) values.bottomRows(extra) = right.values().bottomRows(extra);
  for (auto& [name, tag] : TrajectoryAccess::tags(out)) {
    const NodeTag* other = right.tag(name);
    tag.samples.conservativeResize(left.nodes() + extra, Eigen::NoChange);
    if (extra > 0) tag.samples.bottomRows(extra) = other->samples.bottomRows(extra);
  }
  return out;
}

Trajectory BehaviorSheaf::restrict(const Trajectory& e, double new_length, double offset) const {
  if (restrict_map) return restrict_map(e, new_length, offset);
  return portsheaf::restrict(e, new_length, offset);
}

bool AxiomReport::pass() const {
  return separation_violations() == 0 && gluing_failures() == 0;
}

std::size_t AxiomReport::separation_violations() const {
  std::size_t n = 0;
  for (const auto& c : checks) n += c.separation_violations;
  return n;
}

std::size_t AxiomReport::gluing_failures() const {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const AxiomCheck& c) {
    return !c.glue_exact || !c.glue_member;
  }));
}

AxiomReport check_sheaf_axioms(const BehaviorSheaf& sheaf, std::span<const Trajectory> probes,
                               std::span<const double> cut_points) {
  AxiomReport report;
  report.tolerance = sheaf.tolerance;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const double r = sheaf.residual(probes[i]);
    if (!(r <= sheaf.tolerance)) {
      throw Error(ErrorKind::NotAMember, "probe " + std::to_string(i) + " has residual " + fmt(r) +
                                             " > " + fmt(sheaf.tolerance));
    }
  }

  for (std::size_t i = 0; i < probes.size(); ++i) {
    const Trajectory& e = probes[i];
    const double len = e.length();
    for (const double cut : cut_points) {
      if (!grid_index(cut, e.step())) {
        throw Error(ErrorKind::MisalignedOffset, "cut point " + fmt(cut) + " is off the grid");
      }
      if (!(cut > 0.0) || !(cut < len)) continue;

      AxiomCheck check;
      check.probe = i;
      check.cut = cut;

      const Trajectory left = sheaf.restrict(e, cut, 0.0);
      const Trajectory right = sheaf.restrict(e, len - cut, cut);
      const Trajectory glued = glue(left, right, sheaf.tolerance);
      check.glue_exact = identical(glued, e);
      check.glue_residual = sheaf.residual(glued);
      check.glue_member = check.glue_residual <= sheaf.tolerance;

      auto consider = [&](const Trajectory& candidate) {
        if (candidate.nodes() != e.nodes() || !sheaf.contains(candidate)) return;
        const double dl = sup_distance(sheaf.restrict(candidate, cut, 0.0), left);
        const double dr = sup_distance(sheaf.restrict(candidate, len - cut, cut), right);
        if (dl <= sheaf.tolerance && dr <= sheaf.tolerance) {
          ++check.separation_candidates;
          if (!(sup_distance(candidate, e) <= sheaf.tolerance)) ++check.separation_violations;
        }
      };
      for (std::size_t j = 0; j < probes.size(); ++j) {
        if (j != i) consider(probes[j]);
      }
      if (sheaf.sampler && e.dim() > 0) {
        // Second member assembled independently: restart at the cut.
        try {
          const Trajectory first = sheaf.sampler(e.value(0), cut, e.shift());
          const Trajectory second =
              sheaf.sampler(first.value(first.last()), len - cut, e.shift() - cut);
          consider(glue(first, second, sheaf.tolerance));
        } catch (const Error&) {
          // A sampler that cannot reproduce the probe offers no candidate.
        }
      }
      report.checks.push_back(check);
    }
  }
  return report;
}

bool restriction_functorial(const Trajectory& e, double t0, double tau, double s, double sigma) {
  const Trajectory twice = restrict(restrict(e, t0, tau), s, sigma);
  const Trajectory once = restrict(e, s, tau + sigma);
  return identical(twice, once);
}

BehaviorSheaf constant_sheaf(int value_set_size) {
  if (value_set_size < 1) {
    throw Error(ErrorKind::OutOfRange, "a constant sheaf needs at least one token");
  }
  BehaviorSheaf sheaf;
  sheaf.name = "constant(" + std::to_string(value_set_size) + ")";
  sheaf.membership = [value_set_size](const Trajectory& e) {
    const auto& token = e.token_id();
    const bool ok = e.dim() == 0 && token && *token >= 0 && *token < value_set_size;
    return ok ? 0.0 : std::numeric_limits<double>::infinity();
  };
  sheaf.tolerance = 1e-9;
  return sheaf;
}

}  // namespace portsheaf
