#include "portsheaf/machine.hpp"

#include "portsheaf/errors.hpp"
#include "portsheaf/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace portsheaf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

SheafMorphism then(SheafMorphism first, SheafMorphism second) {
  return [first = std::move(first), second = std::move(second)](const Trajectory& e) {
    return second(first(e));
  };
}

struct LegDefects {
  double eta = 0.0;
  double alpha = 0.0;
};

LegDefects leg_defects(const MachineMorphism& phi, const Machine& src, const Machine& dst,
                       const Trajectory& e) {
  const Trajectory image = phi.beta(e);
  const Trajectory via_eta = phi.eta(src.e_leg(e));
  const Trajectory via_alpha = phi.alpha(src.a_leg(e));
  if (phi.variant == Variant::straight) {
    return {sup_distance(dst.e_leg(image), via_eta), sup_distance(dst.a_leg(image), via_alpha)};
  }
  return {sup_distance(dst.a_leg(image), via_eta), sup_distance(dst.e_leg(image), via_alpha)};
}

void require_members(const Machine& machine, std::span<const Trajectory> probes) {
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const double r = machine.behavior.residual(probes[i]);
    if (!(r <= machine.behavior.tolerance)) {
      throw Error(ErrorKind::NotAMember, "probe " + std::to_string(i) + " is not a member of '" +
                                             machine.name + "' (residual " + fmt(r) + ")");
    }
  }
}

}  // namespace

SheafMorphism identity_map() {
  return [](const Trajectory& e) { return e; };
}

double leg_naturality_defect(const Machine& machine, std::span<const Trajectory> probes) {
  double worst = 0.0;
  for (const auto& e : probes) {
    const Index last = e.last();
    if (last < 1) continue;
    // A handful of grid-aligned windows, including both ends.
    const std::vector<std::pair<Index, Index>> windows = {
        {0, last / 2}, {last / 3, last - last / 3}, {last / 4, last / 2}, {last / 2, last - last / 2}};
    for (const SheafMorphism* leg : {&machine.a_leg, &machine.e_leg}) {
      const Trajectory full = (*leg)(e);
      if (full.nodes() != e.nodes() || full.shift() != e.shift()) return kInf;
      for (const auto& [first, count] : windows) {
        if (count < 1 || first + count > last) continue;
        const Trajectory piece = e.slice(first, count + 1);
        worst = std::max(worst, sup_distance((*leg)(piece), full.slice(first, count + 1)));
      }
    }
  }
  return worst;
}

void check_machine(const Machine& machine, std::span<const Trajectory> probes) {
  const double d = leg_naturality_defect(machine, probes);
  if (!(d <= machine.naturality_tolerance)) {
    throw Error(ErrorKind::StructureViolation, "legs of '" + machine.name +
                                                   "' do not commute with restriction (defect " +
                                                   fmt(d) + ")");
  }
}

Machine swap_legs(const Machine& machine) {
  Machine out = machine;
  std::swap(out.a_leg, out.e_leg);
  std::swap(out.a_labels, out.e_labels);
  out.name = machine.name + " (swapped)";
  return out;
}

MachineMorphism identity_morphism(Variant variant) {
  return {"identity", identity_map(), identity_map(), identity_map(), variant};
}

MachineMorphism compose(const MachineMorphism& outer, const MachineMorphism& inner) {
  MachineMorphism out;
  out.name = outer.name + " . " + inner.name;
  out.beta = then(inner.beta, outer.beta);
  if (inner.variant == Variant::straight) {
    out.eta = then(inner.eta, outer.eta);
    out.alpha = then(inner.alpha, outer.alpha);
  } else {
    out.eta = then(inner.eta, outer.alpha);
    out.alpha = then(inner.alpha, outer.eta);
  }
  out.variant = (inner.variant == outer.variant) ? Variant::straight : Variant::swapped;
  return out;
}

double morphism_defect(const MachineMorphism& phi, const Machine& src, const Machine& dst,
                       std::span<const Trajectory> probes) {
  require_members(src, probes);
  double worst = 0.0;
  for (const auto& e : probes) {
    const LegDefects d = leg_defects(phi, src, dst, e);
    worst = std::max({worst, d.eta, d.alpha});
  }
  return worst;
}

double image_residual(const MachineMorphism& phi, const Machine& dst,
                      std::span<const Trajectory> probes) {
  double worst = 0.0;
  for (const auto& e : probes) worst = std::max(worst, dst.behavior.residual(phi.beta(e)));
  return worst;
}

double min_pairwise_distance(std::span<const Trajectory> probes) {
  double best = kInf;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    for (std::size_t j = i + 1; j < probes.size(); ++j) {
      best = std::min(best, sup_distance(probes[i], probes[j]));
    }
  }
  return best;
}

ProbeResult injectivity_probe(const SheafMorphism& map, std::span<const Trajectory> probes,
                              double separation) {
  ProbeResult result;
  result.separation = separation;
  result.min_image_distance = kInf;
  std::vector<Trajectory> images;
  images.reserve(probes.size());
  for (const auto& e : probes) images.push_back(map(e));
  const double threshold = separation * 1e-3;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    for (std::size_t j = i + 1; j < probes.size(); ++j) {
      if (sup_distance(probes[i], probes[j]) < separation) ++result.close_inputs;
      const double d = sup_distance(images[i], images[j]);
      result.min_image_distance = std::min(result.min_image_distance, d);
      if (d < threshold) result.collisions.emplace_back(i, j);
    }
  }
  return result;
}

Trajectory simulate_iso(const IsoSystem& sys, const Eigen::VectorXd& x0, const InputCurve& input,
                        double shift, double length, double h) {
  const VectorField closed{sys.n,
                           [&sys, &input](double s, const Eigen::VectorXd& x) {
                             return sys.f(s, x, input(s));
                           },
                           sys.description};
  const Trajectory states = integrate(closed, x0, shift, length, h, sys.state_labels);
  Eigen::MatrixXd packed(states.nodes(), sys.n + sys.m);
  packed.leftCols(sys.n) = states.values();
  for (Index j = 0; j < states.nodes(); ++j) {
    const Eigen::VectorXd u = input(states.field_time(j));
    if (u.size() != sys.m) throw Error(ErrorKind::DimensionMismatch, "input curve has wrong dimension");
    packed.row(j).tail(sys.m) = u.transpose();
  }
  std::vector<std::string> labels = sys.state_labels;
  labels.insert(labels.end(), sys.input_labels.begin(), sys.input_labels.end());
  return states.with_values(std::move(packed), std::move(labels));
}

double iso_residual(const IsoSystem& sys, const Trajectory& e) {
  if (e.dim() != sys.n + sys.m) {
    throw Error(ErrorKind::DimensionMismatch, "ISO member needs " + std::to_string(sys.n + sys.m) +
                                                  " channels, got " + std::to_string(e.dim()));
  }
  return stencil_residual(e, 0, sys.n, [&](Index j) {
    const Eigen::VectorXd v = e.value(j);
    return sys.f(e.field_time(j), v.head(sys.n), v.tail(sys.m));
  });
}

Trajectory iso_output(const IsoSystem& sys, const Trajectory& e) {
  if (e.dim() != sys.n + sys.m) {
    throw Error(ErrorKind::DimensionMismatch, "ISO member has the wrong channel count");
  }
  Eigen::MatrixXd y(e.nodes(), sys.p);
  for (Index j = 0; j < e.nodes(); ++j) {
    const Eigen::VectorXd v = e.value(j);
    const Eigen::VectorXd out = sys.g(e.field_time(j), v.head(sys.n), v.tail(sys.m));
    if (out.size() != sys.p) throw Error(ErrorKind::DimensionMismatch, "output map has wrong dimension");
    y.row(j) = out.transpose();
  }
  return e.with_values(std::move(y), sys.output_labels);
}

Machine iso_machine(const IsoSystem& sys, double tolerance, double step) {
  if (static_cast<Index>(sys.state_labels.size()) != sys.n ||
      static_cast<Index>(sys.input_labels.size()) != sys.m ||
      static_cast<Index>(sys.output_labels.size()) != sys.p) {
    throw Error(ErrorKind::DimensionMismatch, "ISO labels do not match n, m, p");
  }
  Machine machine;
  machine.name = sys.description.empty() ? "iso" : sys.description;
  machine.behavior.name = machine.name;
  machine.behavior.tolerance = tolerance;
  machine.behavior.membership = [sys](const Trajectory& e) { return iso_residual(sys, e); };
  machine.behavior.sampler = [sys, step](const Eigen::VectorXd& x0, double length, double shift) {
    if (x0.size() != sys.n && x0.size() != sys.n + sys.m) {
      throw Error(ErrorKind::DimensionMismatch, "initial data must hold states (and inputs)");
    }
    const Eigen::VectorXd u0 =
        x0.size() == sys.n ? Eigen::VectorXd::Zero(sys.m) : Eigen::VectorXd(x0.tail(sys.m));
    return simulate_iso(sys, x0.head(sys.n), [u0](double) { return u0; }, shift, length, step);
  };
  const std::vector<std::string> inputs = sys.input_labels;
  machine.a_leg = [inputs](const Trajectory& e) { return e.with_values(e.channels(inputs), inputs); };
  machine.e_leg = [sys](const Trajectory& e) { return iso_output(sys, e); };
  machine.a_labels = sys.input_labels;
  machine.e_labels = sys.output_labels;

  std::vector<Trajectory> probes;
  const auto starts = probe_points(sys.n + sys.m, 3, 0x150, 1.0);
  for (const auto& x0 : starts) probes.push_back(machine.behavior.sampler(x0, 40.0 * step, 0.25));
  check_machine(machine, probes);
  return machine;
}

std::vector<std::pair<std::string, double>> DiagramReport::worst_by_name() const {
  std::map<std::string, double> worst;
  for (const auto& d : defects) {
    auto [it, inserted] = worst.emplace(d.name, d.value);
    if (!inserted) it->second = std::max(it->second, d.value);
  }
  return {worst.begin(), worst.end()};
}

double DiagramReport::max_defect() const {
  double m = 0.0;
  for (const auto& d : defects) m = std::max(m, d.value);
  return m;
}

DiagramReport verify_port_control_diagram(const Machine& closed, const Machine& enclosing,
                                          const Machine& port, const MachineMorphism& psi,
                                          const MachineMorphism& xi, const MachineMorphism& a_phi,
                                          std::span<const Trajectory> probes,
                                          const DiagramOptions& options) {
  require_members(closed, probes);

  // The constant leg must land in a constant sheaf: one value for all probes and times.
  const SheafMorphism& constant = closed.leg(options.constant_leg);
  std::optional<Trajectory> reference;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const Trajectory out = constant(probes[i]);
    if (!reference) reference = out;
    bool same = out.token_id() == reference->token_id() && out.dim() == reference->dim();
    if (same && out.dim() > 0) {
      const Eigen::RowVectorXd first = reference->values().row(0);
      same = ((out.values().rowwise() - first).cwiseAbs().maxCoeff() <= 1e-12);
    }
    if (!same) {
      throw Error(ErrorKind::NotClosed, "constant leg of '" + closed.name +
                                            "' varies (probe " + std::to_string(i) + ")");
    }
  }

  DiagramReport report;
  report.tolerance = options.tolerance;
  const MachineMorphism through_port = compose(xi, psi);

  std::vector<Trajectory> port_images;
  port_images.reserve(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const Trajectory& e = probes[i];
    const Trajectory mid = psi.beta(e);

    const LegDefects dpsi = leg_defects(psi, closed, port, e);
    report.defects.push_back({"psi.eta", i, dpsi.eta});
    report.defects.push_back({"psi.alpha", i, dpsi.alpha});
    report.defects.push_back({"psi.image_residual", i, port.behavior.residual(mid)});

    const LegDefects dxi = leg_defects(xi, port, enclosing, mid);
    report.defects.push_back({"xi.eta", i, dxi.eta});
    report.defects.push_back({"xi.alpha", i, dxi.alpha});
    const Trajectory top = xi.beta(mid);
    report.defects.push_back({"xi.image_residual", i, enclosing.behavior.residual(top)});

    const LegDefects dphi = leg_defects(a_phi, closed, enclosing, e);
    report.defects.push_back({"a_phi.eta", i, dphi.eta});
    report.defects.push_back({"a_phi.alpha", i, dphi.alpha});
    const Trajectory direct = a_phi.beta(e);
    report.defects.push_back({"a_phi.image_residual", i, enclosing.behavior.residual(direct)});

    report.defects.push_back({"triangle.beta", i, sup_distance(top, direct)});
    const double tri_eta = through_port.variant == a_phi.variant
                               ? sup_distance(through_port.eta(closed.e_leg(e)), a_phi.eta(closed.e_leg(e)))
                               : kInf;
    const double tri_alpha =
        through_port.variant == a_phi.variant
            ? sup_distance(through_port.alpha(closed.a_leg(e)), a_phi.alpha(closed.a_leg(e)))
            : kInf;
    report.defects.push_back({"triangle.eta", i, tri_eta});
    report.defects.push_back({"triangle.alpha", i, tri_alpha});
    port_images.push_back(mid);
  }

  const double sep_closed = min_pairwise_distance(probes);
  const double sep_port = min_pairwise_distance(port_images);
  if (probes.size() >= 2) {
    report.injectivity.push_back({"psi.beta", injectivity_probe(psi.beta, probes, sep_closed)});
    report.injectivity.push_back({"xi.beta", injectivity_probe(xi.beta, port_images, sep_port)});
    report.injectivity.push_back({"a_phi.beta", injectivity_probe(a_phi.beta, probes, sep_closed)});
  } else {
    report.notes.push_back("fewer than two probes: injectivity not probed");
  }

  report.pass = std::all_of(report.defects.begin(), report.defects.end(),
                            [&](const NamedDefect& d) { return d.value <= options.tolerance; }) &&
                std::all_of(report.injectivity.begin(), report.injectivity.end(),
                            [](const InjectivityEntry& e) { return e.result.evidence_of_injectivity(); });
  return report;
}

nlohmann::json to_json(const DiagramReport& report) {
  using nlohmann::json;
  // JSON has no infinity; non-finite defects are written as null.
  auto number = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json defects = json::object();
  for (const auto& d : report.defects) {
    defects[d.name].push_back(number(d.value));
  }
  json worst = json::object();
  for (const auto& [name, value] : report.worst_by_name()) worst[name] = number(value);
  json injectivity = json::array();
  for (const auto& entry : report.injectivity) {
    json collisions = json::array();
    for (const auto& [i, j] : entry.result.collisions) collisions.push_back({i, j});
    injectivity.push_back({{"map", entry.map},
                           {"separation", number(entry.result.separation)},
                           {"min_image_distance", number(entry.result.min_image_distance)},
                           {"close_inputs", entry.result.close_inputs},
                           {"collisions", collisions},
                           {"evidence_of_injectivity", entry.result.evidence_of_injectivity()}});
  }
  return {{"tolerance", report.tolerance},
          {"defects", defects},
          {"worst", worst},
          {"injectivity", injectivity},
          {"notes", report.notes},
          {"pass", report.pass}};
}

}  // namespace portsheaf
