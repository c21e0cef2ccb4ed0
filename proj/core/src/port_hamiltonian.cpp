#include "portsheaf/port_hamiltonian.hpp"

#include "portsheaf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace portsheaf {

namespace {

std::string point_string(const Eigen::VectorXd& x) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x(i);
  os << ")";
  return os.str();
}

std::vector<std::string> prefixed(const std::string& prefix, const std::vector<std::string>& base) {
  std::vector<std::string> out;
  out.reserve(base.size());
  for (const auto& b : base) out.push_back(prefix + b);
  return out;
}

void require_shape(const Eigen::MatrixXd& m, Index rows, Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(what) + " is " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" +
                    std::to_string(cols));
  }
}

Eigen::VectorXd closed_rhs(const PHSystem& sys, const Eigen::VectorXd& x) {
  return (sys.J(x) - sys.R(x)) * sys.gradient(x);
}

// zeta = -int_0 B^T grad H dw on e's grid, without the membership check.
Trajectory embed_unchecked(const PHSystem& sys, const Trajectory& e) {
  if (e.dim() != sys.n) {
    throw Error(ErrorKind::DimensionMismatch, "closed member needs " + std::to_string(sys.n) +
                                                  " channels, got " + std::to_string(e.dim()));
  }
  Eigen::MatrixXd integrand(e.nodes(), sys.m);
  for (Index j = 0; j < e.nodes(); ++j) {
    const Eigen::VectorXd x = e.value(j);
    integrand.row(j) = (sys.B(x).transpose() * sys.gradient(x)).transpose();
  }
  Eigen::MatrixXd values(e.nodes(), sys.n + sys.m);
  values.leftCols(sys.n) = e.values();
  values.rightCols(sys.m) = -cumulative_trapezoid(integrand, e.step());
  Trajectory out = e.with_values(std::move(values), sys.extended_labels());
  out.set_tag(kAuxHamiltonianTag, zero_tag(e.nodes()));
  return out;
}

SheafMorphism then(SheafMorphism first, SheafMorphism second) {
  return [first = std::move(first), second = std::move(second)](const Trajectory& e) {
    return second(first(e));
  };
}

}  // namespace

Eigen::VectorXd PHSystem::gradient(const Eigen::VectorXd& x) const {
  return grad_h ? grad_h(x) : finite_difference_gradient(H, x);
}

std::vector<std::string> PHSystem::zeta_labels() const { return prefixed("zeta_", port_labels); }
std::vector<std::string> PHSystem::input_labels() const { return prefixed("u_", port_labels); }
std::vector<std::string> PHSystem::output_labels() const { return prefixed("y_", port_labels); }

std::vector<std::string> PHSystem::extended_labels() const {
  std::vector<std::string> out = state_labels;
  const auto z = zeta_labels();
  out.insert(out.end(), z.begin(), z.end());
  return out;
}

PHSystem mass_spring_system(double k, double mass) {
  if (!(k > 0.0) || !(mass > 0.0)) {
    throw Error(ErrorKind::ConfigError, "mass_spring needs k > 0 and m > 0");
  }
  PHSystem sys;
  sys.name = "mass_spring";
  sys.n = 2;
  sys.m = 1;
  sys.J = constant_field((Eigen::MatrixXd(2, 2) << 0.0, 1.0, -1.0, 0.0).finished());
  sys.R = constant_field(Eigen::MatrixXd::Zero(2, 2));
  sys.B = constant_field((Eigen::MatrixXd(2, 1) << 0.0, 1.0).finished());
  sys.H = [k, mass](const Eigen::VectorXd& x) {
    return 0.5 * (k * x(0) * x(0) + x(1) * x(1) / mass);
  };
  sys.grad_h = [k, mass](const Eigen::VectorXd& x) {
    return Eigen::Vector2d(k * x(0), x(1) / mass).eval();
  };
  sys.state_labels = {"q", "p"};
  sys.port_labels = {"f"};
  return sys;
}

PHSystem linear_ph_system(const Eigen::MatrixXd& j, const Eigen::MatrixXd& r,
                          const Eigen::MatrixXd& b, Polynomial h, std::string name) {
  const Index n = j.rows();
  require_shape(j, n, n, "J");
  require_shape(r, n, n, "R");
  if (b.rows() != n) throw Error(ErrorKind::DimensionMismatch, "B must have n rows");
  if (h.dim() != n) throw Error(ErrorKind::DimensionMismatch, "H must be a function of n variables");
  PHSystem sys;
  sys.name = std::move(name);
  sys.n = n;
  sys.m = b.cols();
  sys.J = constant_field(j);
  sys.R = constant_field(r);
  sys.B = constant_field(b);
  sys.H = [h](const Eigen::VectorXd& x) { return h(x); };
  sys.grad_h = [h](const Eigen::VectorXd& x) { return h.gradient(x); };
  sys.state_labels = indexed_labels("x", n);
  sys.port_labels = indexed_labels("p", sys.m);
  return sys;
}

std::vector<Eigen::VectorXd> structure_probes(Index dim, std::uint64_t seed) {
  return probe_points(dim, 16, seed, 2.0);
}

StructureReport check_ph_structure(const PHSystem& sys, std::span<const Eigen::VectorXd> points) {
  if (static_cast<Index>(sys.state_labels.size()) != sys.n ||
      static_cast<Index>(sys.port_labels.size()) != sys.m) {
    throw Error(ErrorKind::DimensionMismatch, "state/port labels do not match n, m");
  }
  StructureReport report;
  for (const auto& x : points) {
    const Eigen::MatrixXd j = sys.J(x);
    const Eigen::MatrixXd r = sys.R(x);
    require_shape(j, sys.n, sys.n, "J(x)");
    require_shape(r, sys.n, sys.n, "R(x)");
    require_shape(sys.B(x), sys.n, sys.m, "B(x)");
    const double anti = antisymmetry_defect(j);
    const double sym = symmetry_defect(r);
    const double eig = min_symmetric_eigenvalue(r);
    report.antisymmetry = std::max(report.antisymmetry, anti);
    report.symmetry = std::max(report.symmetry, sym);
    report.min_eigenvalue = std::min(report.min_eigenvalue, eig);
    if (!(anti <= 1e-10)) {
      throw Error(ErrorKind::StructureViolation,
                  "J is not antisymmetric at " + point_string(x) + " (defect " +
                      std::to_string(anti) + ")");
    }
    if (!(sym <= 1e-10) || !(eig >= -1e-10)) {
      throw Error(ErrorKind::StructureViolation,
                  "R is not symmetric positive semidefinite at " + point_string(x));
    }
    if (sys.grad_h) {
      const Eigen::VectorXd g = sys.grad_h(x);
      const Eigen::VectorXd fd = finite_difference_gradient(sys.H, x);
      if (g.size() != sys.n) throw Error(ErrorKind::DimensionMismatch, "grad H has wrong size");
      const double err = (g - fd).cwiseAbs().maxCoeff();
      report.gradient_error = std::max(report.gradient_error, err);
      if (!(err <= 1e-5 * std::max(1.0, g.cwiseAbs().maxCoeff()))) {
        throw Error(ErrorKind::StructureViolation,
                    "grad H disagrees with finite differences at " + point_string(x));
      }
    }
  }
  return report;
}

OdeBehavior closed_behavior(const PHSystem& sys, double step, double tolerance) {
  const auto probes = structure_probes(sys.n);
  check_ph_structure(sys, probes);
  OdeBehavior behavior;
  behavior.field = {sys.n,
                    [sys](double, const Eigen::VectorXd& x) { return closed_rhs(sys, x); },
                    sys.name + ": x' = (J - R) grad H"};
  behavior.step = step;
  behavior.residual_tolerance = tolerance;
  behavior.labels = sys.state_labels;
  return behavior;
}

std::pair<MatrixField, MatrixField> extended_structure(const PHSystem& sys) {
  const Index n = sys.n;
  const Index m = sys.m;
  MatrixField jx = [sys, n, m](const Eigen::VectorXd& xi) {
    const Eigen::VectorXd x = xi.head(n);
    const Eigen::MatrixXd b = sys.B(x);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n + m, n + m);
    out.topLeftCorner(n, n) = sys.J(x);
    out.topRightCorner(n, m) = b;
    out.bottomLeftCorner(m, n) = -b.transpose();
    return out;
  };
  MatrixField rx = [sys, n, m](const Eigen::VectorXd& xi) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n + m, n + m);
    out.topLeftCorner(n, n) = sys.R(xi.head(n));
    return out;
  };
  return {std::move(jx), std::move(rx)};
}

namespace {

Eigen::VectorXd extended_rhs(const PHSystem& sys, const Eigen::VectorXd& xi,
                             const Eigen::VectorXd& aux_grad) {
  const Eigen::VectorXd x = xi.head(sys.n);
  const Eigen::VectorXd g = sys.gradient(x);
  const Eigen::MatrixXd b = sys.B(x);
  Eigen::VectorXd out(sys.n + sys.m);
  out.head(sys.n) = (sys.J(x) - sys.R(x)) * g + b * aux_grad;
  out.tail(sys.m) = -b.transpose() * g;
  return out;
}

}  // namespace

OdeBehavior extended_behavior(const PHSystem& sys, const AuxHamiltonian& aux, double step,
                              double tolerance) {
  check_ph_structure(sys, structure_probes(sys.n));
  if (aux.m != sys.m) {
    throw Error(ErrorKind::DimensionMismatch, "auxiliary potential acts on " +
                                                  std::to_string(aux.m) + " port coordinates, system has " +
                                                  std::to_string(sys.m));
  }
  OdeBehavior behavior;
  behavior.field = {sys.n + sys.m,
                    [sys, aux](double s, const Eigen::VectorXd& xi) {
                      return extended_rhs(sys, xi, aux.gradient(s, xi.tail(sys.m)));
                    },
                    sys.name + " extended, " + std::string(to_string(aux.kind)) + " potential"};
  behavior.step = step;
  behavior.residual_tolerance = tolerance;
  behavior.labels = sys.extended_labels();
  return behavior;
}

Trajectory integrate_extended(const PHSystem& sys, const AuxHamiltonian& aux,
                              const Eigen::VectorXd& xi0, double shift, double length, double h) {
  const OdeBehavior behavior = extended_behavior(sys, aux, h);
  Trajectory e = integrate(behavior.field, xi0, shift, length, h, behavior.labels);
  e.set_tag(kAuxHamiltonianTag, aux.sample_on(e));
  return e;
}

double extended_residual(const PHSystem& sys, const Trajectory& e) {
  const NodeTag* tag = e.tag(kAuxHamiltonianTag);
  if (!tag) throw Error(ErrorKind::MissingAuxTag, "extended trajectory carries no auxiliary Hamiltonian");
  if (e.dim() != sys.n + sys.m) {
    throw Error(ErrorKind::DimensionMismatch, "extended member needs " +
                                                  std::to_string(sys.n + sys.m) + " channels");
  }
  return stencil_residual(e, 0, sys.n + sys.m, [&](Index j) {
    const Eigen::VectorXd xi = e.value(j);
    return extended_rhs(sys, xi, aux_gradient(*tag, j, xi.tail(sys.m)));
  });
}

BehaviorSheaf enclosing_sheaf(const PHSystem& sys, double tolerance, double step) {
  BehaviorSheaf sheaf;
  sheaf.name = sys.name + " extended";
  sheaf.tolerance = tolerance;
  sheaf.membership = [sys](const Trajectory& e) { return extended_residual(sys, e); };
  sheaf.sampler = [sys, step](const Eigen::VectorXd& xi0, double length, double shift) {
    Eigen::VectorXd start = Eigen::VectorXd::Zero(sys.n + sys.m);
    if (xi0.size() == sys.n) {
      start.head(sys.n) = xi0;
    } else if (xi0.size() == sys.n + sys.m) {
      start = xi0;
    } else {
      throw Error(ErrorKind::DimensionMismatch, "initial data must hold states (and zeta)");
    }
    return integrate_extended(sys, AuxHamiltonian::zero(sys.m), start, shift, length, step);
  };
  return sheaf;
}

Trajectory embed_closed(const PHSystem& sys, const Trajectory& e, double tolerance) {
  if (e.dim() != sys.n) {
    throw Error(ErrorKind::NotAMember, "closed member needs " + std::to_string(sys.n) + " channels");
  }
  const double r = stencil_residual(e, 0, sys.n, [&](Index j) { return closed_rhs(sys, e.value(j)); });
  if (!(r <= tolerance)) {
    throw Error(ErrorKind::NotAMember,
                "trajectory is not in the closed behaviour (residual " + std::to_string(r) + ")");
  }
  return embed_unchecked(sys, e);
}

std::pair<SheafMorphism, SheafMorphism> projections(const PHSystem& sys) {
  SheafMorphism a_leg = [sys](const Trajectory& e) {
    const NodeTag* tag = e.tag(kAuxHamiltonianTag);
    if (!tag) throw Error(ErrorKind::MissingAuxTag, "a_leg needs the auxiliary Hamiltonian tag");
    Eigen::MatrixXd out(e.nodes(), sys.m);
    for (Index j = 0; j < e.nodes(); ++j) {
      const Eigen::VectorXd zeta = e.value(j).tail(sys.m);
      out.row(j) = aux_gradient(*tag, j, zeta).transpose();
    }
    return e.with_values(std::move(out), sys.input_labels());
  };
  SheafMorphism e_leg = [sys](const Trajectory& e) {
    if (!e.tag(kAuxHamiltonianTag)) {
      throw Error(ErrorKind::MissingAuxTag, "e_leg needs an extended trajectory");
    }
    const Eigen::MatrixXd zeta = e.values().rightCols(sys.m);
    return e.with_values(-time_derivative(zeta, e.step()), sys.output_labels());
  };
  return {std::move(a_leg), std::move(e_leg)};
}

IsoSystem ph_iso_system(const PHSystem& sys) {
  IsoSystem iso;
  iso.n = sys.n;
  iso.m = sys.m;
  iso.p = sys.m;
  iso.f = [sys](double, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    return (closed_rhs(sys, x) + sys.B(x) * u).eval();
  };
  iso.g = [sys](double, const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    return (sys.B(x).transpose() * sys.gradient(x)).eval();
  };
  iso.state_labels = sys.state_labels;
  iso.input_labels = sys.input_labels();
  iso.output_labels = sys.output_labels();
  iso.description = sys.name + " port system";
  return iso;
}

Machine ph_iso_machine(const PHSystem& sys, double tolerance, double step) {
  check_ph_structure(sys, structure_probes(sys.n));
  return iso_machine(ph_iso_system(sys), tolerance, step);
}

PowerAudit power_balance_audit(const PHSystem& sys, const Trajectory& iso_member) {
  if (iso_member.dim() != sys.n + sys.m) {
    throw Error(ErrorKind::DimensionMismatch, "power audit needs (x, u) channels");
  }
  const Index nodes = iso_member.nodes();
  Eigen::VectorXd energy(nodes);
  for (Index j = 0; j < nodes; ++j) energy(j) = sys.H(iso_member.value(j).head(sys.n));
  const Eigen::VectorXd rate = time_derivative(energy, iso_member.step());
  PowerAudit audit;
  audit.supply_excess = -std::numeric_limits<double>::infinity();
  for (Index j = 0; j < nodes; ++j) {
    const Eigen::VectorXd v = iso_member.value(j);
    const Eigen::VectorXd x = v.head(sys.n);
    const Eigen::VectorXd g = sys.gradient(x);
    const double supply = (sys.B(x).transpose() * g).dot(v.tail(sys.m));
    const double dissipation = g.dot(sys.R(x) * g);
    audit.balance_defect = std::max(audit.balance_defect, std::abs(rate(j) - supply + dissipation));
    audit.supply_excess = std::max(audit.supply_excess, rate(j) - supply);
  }
  return audit;
}

EnergyAudit energy_audit(const ScalarField& h, const Trajectory& e, Index first, Index count) {
  if (count < 0) count = e.dim() - first;
  if (first < 0 || first + count > e.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "energy audit channels outside the trajectory");
  }
  EnergyAudit audit;
  if (e.nodes() > 1) audit.max_increase = -std::numeric_limits<double>::infinity();
  const double h0 = h(e.value(0).segment(first, count));
  double previous = h0;
  for (Index j = 1; j < e.nodes(); ++j) {
    const double hj = h(e.value(j).segment(first, count));
    audit.max_drift = std::max(audit.max_drift, std::abs(hj - h0));
    audit.max_increase = std::max(audit.max_increase, hj - previous);
    previous = hj;
  }
  return audit;
}

SheafMorphism port_embedding(const PHSystem& sys, double sign) {
  return [sys, sign](const Trajectory& e) {
    if (e.dim() != sys.n + sys.m) {
      throw Error(ErrorKind::DimensionMismatch, "port member needs (x, u) channels");
    }
    Eigen::MatrixXd outputs(e.nodes(), sys.m);
    for (Index j = 0; j < e.nodes(); ++j) {
      const Eigen::VectorXd x = e.value(j).head(sys.n);
      outputs.row(j) = (sys.B(x).transpose() * sys.gradient(x)).transpose();
    }
    Eigen::MatrixXd values(e.nodes(), sys.n + sys.m);
    values.leftCols(sys.n) = e.values().leftCols(sys.n);
    values.rightCols(sys.m) = -sign * cumulative_trapezoid(outputs, e.step());
    const Eigen::MatrixXd inputs = e.values().rightCols(sys.m);
    Trajectory out = e.with_values(std::move(values), sys.extended_labels());
    out.set_tag(kAuxHamiltonianTag, linear_tag(inputs));
    return out;
  };
}

SheafMorphism constant_leg() {
  return [](const Trajectory& e) { return e.as_token(0); };
}

SheafMorphism zero_port(Index m, std::vector<std::string> labels) {
  return [m, labels = std::move(labels)](const Trajectory& e) {
    return e.with_values(Eigen::MatrixXd::Zero(e.nodes(), m), labels);
  };
}

PortControlDiagram ph_diagram(const PHSystem& sys, double tolerance, double step) {
  PortControlDiagram d;
  d.options.tolerance = tolerance;
  d.options.constant_leg = Leg::a;

  auto [a_leg, e_leg] = projections(sys);
  SheafMorphism embed = [sys](const Trajectory& e) { return embed_unchecked(sys, e); };

  d.enclosing.name = sys.name + " enclosing";
  d.enclosing.behavior = enclosing_sheaf(sys, tolerance, step);
  d.enclosing.a_leg = a_leg;
  d.enclosing.e_leg = e_leg;
  d.enclosing.a_labels = sys.input_labels();
  d.enclosing.e_labels = sys.output_labels();
  d.enclosing.naturality_tolerance = tolerance;

  d.closed.name = sys.name + " closed";
  d.closed.behavior = as_behavior_sheaf(closed_behavior(sys, step, tolerance));
  d.closed.a_leg = constant_leg();
  d.closed.e_leg = then(embed, e_leg);
  d.closed.e_labels = sys.output_labels();
  d.closed.naturality_tolerance = tolerance;

  d.port = ph_iso_machine(sys, tolerance, step);

  const Index n = sys.n;
  const Index m = sys.m;
  std::vector<std::string> packed = sys.state_labels;
  for (const auto& l : sys.input_labels()) packed.push_back(l);
  d.psi.name = "psi";
  d.psi.beta = [n, m, packed](const Trajectory& e) {
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(e.nodes(), n + m);
    v.leftCols(n) = e.values();
    return e.with_values(std::move(v), packed);
  };
  d.psi.eta = identity_map();
  d.psi.alpha = zero_port(m, sys.input_labels());

  d.xi.name = "xi";
  d.xi.beta = port_embedding(sys);
  d.xi.eta = identity_map();
  d.xi.alpha = identity_map();

  d.a_phi.name = "embedding";
  d.a_phi.beta = embed;
  d.a_phi.eta = identity_map();
  d.a_phi.alpha = zero_port(m, sys.input_labels());
  return d;
}

DiagramReport build_ph_diagram(const PHSystem& sys, std::span<const Trajectory> probes,
                               double tolerance) {
  const double step = probes.empty() ? 1e-3 : probes.front().step();
  return ph_diagram(sys, tolerance, step).verify(probes);
}

std::vector<Trajectory> closed_probes(const PHSystem& sys, std::size_t count, std::uint64_t seed,
                                      double length, double step, double shift) {
  const OdeBehavior behavior = closed_behavior(sys, step);
  std::vector<Trajectory> out;
  out.reserve(count);
  for (const auto& x0 : probe_points(sys.n, count, seed, 2.0)) {
    out.push_back(integrate(behavior.field, x0, shift, length, step, behavior.labels));
  }
  return out;
}

}  // namespace portsheaf
