#include "portsheaf/metriplectic.hpp"

#include "portsheaf/errors.hpp"
#include "portsheaf/port_hamiltonian.hpp"

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

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::vector<std::string> prefixed(const std::string& prefix, const std::vector<std::string>& base) {
  std::vector<std::string> out;
  for (const auto& b : base) out.push_back(prefix + b);
  return out;
}

void require_shape(const Eigen::MatrixXd& m, Index rows, Index cols, const std::string& what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw Error(ErrorKind::DimensionMismatch,
                what + " is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                    ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Eigen::MatrixXd extended_dissipation(const MetriplecticSystem& sys, const Eigen::VectorXd& x) {
  const Index n = sys.n;
  const Index m = sys.m;
  Eigen::MatrixXd out(n + m, n + m);
  const Eigen::MatrixXd a = sys.A(x);
  out.topLeftCorner(n, n) = sys.G(x);
  out.topRightCorner(n, m) = a;
  out.bottomLeftCorner(m, n) = a.transpose();
  out.bottomRightCorner(m, m) = sys.Gt(x);
  return out;
}

Eigen::VectorXd closed_rhs(const MetriplecticSystem& sys, const Eigen::VectorXd& x) {
  return sys.J(x) * sys.gradient_h(x) + sys.G(x) * sys.gradient_s(x);
}

// xi' = Jx grad(H + H_a) + Gx grad(S + S_a).
Eigen::VectorXd extended_rhs(const MetriplecticSystem& sys, const Eigen::VectorXd& xi,
                             const Eigen::VectorXd& aux_h, const Eigen::VectorXd& aux_s) {
  const Eigen::VectorXd x = xi.head(sys.n);
  const Eigen::VectorXd gh = sys.gradient_h(x);
  const Eigen::VectorXd gs = sys.gradient_s(x);
  const Eigen::MatrixXd b = sys.B(x);
  const Eigen::MatrixXd a = sys.A(x);
  Eigen::VectorXd out(sys.n + sys.m);
  out.head(sys.n) = sys.J(x) * gh + b * aux_h + sys.G(x) * gs + a * aux_s;
  out.tail(sys.m) = -b.transpose() * gh + sys.Jt(x) * aux_h + a.transpose() * gs + sys.Gt(x) * aux_s;
  return out;
}

const NodeTag& require_tag(const Trajectory& e, const std::string& name) {
  const NodeTag* tag = e.tag(name);
  if (!tag) throw Error(ErrorKind::MissingAuxTag, "extended trajectory has no '" + name + "' tag");
  return *tag;
}

Eigen::VectorXd port_output(const MetriplecticSystem& sys, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& u, const Eigen::VectorXd& tau) {
  return sys.B(x).transpose() * sys.gradient_h(x) - sys.A(x).transpose() * sys.gradient_s(x) -
         sys.Jt(x) * u - sys.Gt(x) * tau;
}

Trajectory embed_unchecked(const MetriplecticSystem& sys, const Trajectory& e) {
  if (e.dim() != sys.n) {
    throw Error(ErrorKind::DimensionMismatch, "closed member needs " + std::to_string(sys.n) +
                                                  " channels, got " + std::to_string(e.dim()));
  }
  Eigen::MatrixXd integrand(e.nodes(), sys.m);
  for (Index j = 0; j < e.nodes(); ++j) {
    const Eigen::VectorXd x = e.value(j);
    integrand.row(j) = (sys.B(x).transpose() * sys.gradient_h(x) -
                        sys.A(x).transpose() * sys.gradient_s(x))
                           .transpose();
  }
  Eigen::MatrixXd values(e.nodes(), sys.n + sys.m);
  values.leftCols(sys.n) = e.values();
  values.rightCols(sys.m) = -cumulative_trapezoid(integrand, e.step());
  Trajectory out = e.with_values(std::move(values), sys.extended_labels());
  out.set_tag(kAuxHamiltonianTag, zero_tag(e.nodes()));
  out.set_tag(kAuxEntropyTag, zero_tag(e.nodes()));
  return out;
}

SheafMorphism then(SheafMorphism first, SheafMorphism second) {
  return [first = std::move(first), second = std::move(second)](const Trajectory& e) {
    return second(first(e));
  };
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

void track(SideCondition& c, double value, Index node) {
  if (!(value <= c.value)) {
    c.value = std::isnan(value) ? std::numeric_limits<double>::infinity() : value;
    c.node = node;
  }
}

}  // namespace

Eigen::VectorXd MetriplecticSystem::gradient_h(const Eigen::VectorXd& x) const {
  return grad_h ? grad_h(x) : finite_difference_gradient(H, x);
}

Eigen::VectorXd MetriplecticSystem::gradient_s(const Eigen::VectorXd& x) const {
  return grad_s ? grad_s(x) : finite_difference_gradient(S, x);
}

std::vector<std::string> MetriplecticSystem::zeta_labels() const { return prefixed("zeta_", port_labels); }
std::vector<std::string> MetriplecticSystem::input_labels() const { return prefixed("u_", port_labels); }
std::vector<std::string> MetriplecticSystem::tau_labels() const { return prefixed("tau_in_", port_labels); }
std::vector<std::string> MetriplecticSystem::output_labels() const { return prefixed("y_", port_labels); }
std::vector<std::string> MetriplecticSystem::extended_labels() const {
  return concat(state_labels, zeta_labels());
}

MetriplecticSystem rigid_body_system(const Eigen::Vector3d& inertia, double gamma, bool with_port) {
  if (!(inertia.minCoeff() > 0.0) || !(gamma >= 0.0)) {
    throw Error(ErrorKind::ConfigError, "rigid_body needs positive inertias and gamma >= 0");
  }
  MetriplecticSystem sys;
  sys.name = "rigid_body";
  sys.n = 3;
  sys.m = with_port ? 1 : 0;
  const Eigen::Vector3d inv = inertia.cwiseInverse();
  sys.H = [inv](const Eigen::VectorXd& x) { return 0.5 * x.cwiseProduct(x).dot(inv); };
  sys.grad_h = [inv](const Eigen::VectorXd& x) { return x.cwiseProduct(inv).eval(); };
  sys.S = [](const Eigen::VectorXd& x) { return 0.5 * x.squaredNorm(); };
  sys.grad_s = [](const Eigen::VectorXd& x) { return x; };
  sys.J = [](const Eigen::VectorXd& x) { return Eigen::MatrixXd(hat(Eigen::Vector3d(x))); };
  sys.G = [inv, gamma](const Eigen::VectorXd& x) {
    const Eigen::Vector3d g = x.cwiseProduct(inv);
    const double g2 = g.squaredNorm();
    Eigen::MatrixXd out = gamma * Eigen::MatrixXd::Identity(3, 3);
    // Outer product first: a fused expression rounds g_i g_j and g_j g_i differently.
    const Eigen::Matrix3d outer = g * g.transpose();
    if (g2 > 0.0) out -= (gamma / g2) * outer;
    return out;
  };
  const Index m = sys.m;
  sys.B = [m](const Eigen::VectorXd& x) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(3, m);
    if (m > 0) b.col(0) = Eigen::Vector3d::UnitZ().cross(Eigen::Vector3d(x));
    return b;
  };
  sys.A = [m](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(3, m).eval(); };
  sys.Jt = [m](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(m, m).eval(); };
  sys.Gt = sys.Jt;
  sys.state_labels = {"x1", "x2", "x3"};
  if (with_port) sys.port_labels = {"r"};
  return sys;
}

MetriplecticSystem linear_metriplectic_system(const Eigen::MatrixXd& j, const Eigen::MatrixXd& g,
                                              const Eigen::MatrixXd& b, const Eigen::MatrixXd& a,
                                              const Eigen::MatrixXd& jt, const Eigen::MatrixXd& gt,
                                              Polynomial h, Polynomial s, std::string name) {
  const Index n = j.rows();
  const Index m = b.cols();
  require_shape(j, n, n, "J");
  require_shape(g, n, n, "G");
  require_shape(b, n, m, "B");
  require_shape(a, n, m, "A");
  require_shape(jt, m, m, "Jt");
  require_shape(gt, m, m, "Gt");
  if (h.dim() != n || s.dim() != n) {
    throw Error(ErrorKind::DimensionMismatch, "H and S must be functions of n variables");
  }
  MetriplecticSystem sys;
  sys.name = std::move(name);
  sys.n = n;
  sys.m = m;
  sys.J = constant_field(j);
  sys.G = constant_field(g);
  sys.B = constant_field(b);
  sys.A = constant_field(a);
  sys.Jt = constant_field(jt);
  sys.Gt = constant_field(gt);
  sys.H = [h](const Eigen::VectorXd& x) { return h(x); };
  sys.grad_h = [h](const Eigen::VectorXd& x) { return h.gradient(x); };
  sys.S = [s](const Eigen::VectorXd& x) { return s(x); };
  sys.grad_s = [s](const Eigen::VectorXd& x) { return s.gradient(x); };
  sys.state_labels = indexed_labels("x", n);
  sys.port_labels = indexed_labels("p", m);
  return sys;
}

MetriplecticStructure check_metriplectic_structure(const MetriplecticSystem& sys,
                                                   std::span<const Eigen::VectorXd> points) {
  if (static_cast<Index>(sys.state_labels.size()) != sys.n ||
      static_cast<Index>(sys.port_labels.size()) != sys.m) {
    throw Error(ErrorKind::DimensionMismatch, "state/port labels do not match n, m");
  }
  MetriplecticStructure report;
  for (const auto& x : points) {
    const Eigen::MatrixXd j = sys.J(x);
    const Eigen::MatrixXd g = sys.G(x);
    const Eigen::MatrixXd jt = sys.Jt(x);
    require_shape(j, sys.n, sys.n, "J(x)");
    require_shape(g, sys.n, sys.n, "G(x)");
    require_shape(sys.B(x), sys.n, sys.m, "B(x)");
    require_shape(sys.A(x), sys.n, sys.m, "A(x)");
    require_shape(jt, sys.m, sys.m, "Jt(x)");
    require_shape(sys.Gt(x), sys.m, sys.m, "Gt(x)");
    const double anti = std::max(antisymmetry_defect(j), jt.size() ? antisymmetry_defect(jt) : 0.0);
    const double sym = symmetry_defect(g);
    const double eig = min_symmetric_eigenvalue(g);
    const Eigen::MatrixXd ext = extended_dissipation(sys, x);
    const double ext_eig = min_symmetric_eigenvalue(ext);
    report.antisymmetry = std::max(report.antisymmetry, anti);
    report.symmetry = std::max(report.symmetry, sym);
    report.min_eigenvalue = std::min(report.min_eigenvalue, eig);
    report.extended_min_eigenvalue = std::min(report.extended_min_eigenvalue, ext_eig);
    if (!(anti <= 1e-10)) {
      throw Error(ErrorKind::StructureViolation, "J or Jt is not antisymmetric at " + point_string(x));
    }
    if (!(sym <= 1e-10) || !(eig >= -1e-10)) {
      throw Error(ErrorKind::StructureViolation,
                  "G is not symmetric positive semidefinite at " + point_string(x));
    }
    if (!(symmetry_defect(ext) <= 1e-10) || !(ext_eig >= -1e-10)) {
      throw Error(ErrorKind::StructureViolation,
                  "[[G, A], [A^T, Gt]] is not positive semidefinite at " + point_string(x) +
                      " (min eigenvalue " + fmt(ext_eig) + ")");
    }
  }
  return report;
}

NoninteractionResiduals noninteraction_residuals(const MetriplecticSystem& sys,
                                                 std::span<const Eigen::VectorXd> points) {
  NoninteractionResiduals r;
  double worst = -1.0;
  for (const auto& x : points) {
    const double js = inf_norm(sys.J(x) * sys.gradient_s(x));
    const double gh = inf_norm(sys.G(x) * sys.gradient_h(x));
    r.j_grad_s = std::max(r.j_grad_s, js);
    r.g_grad_h = std::max(r.g_grad_h, gh);
    if (std::max(js, gh) > worst) {
      worst = std::max(js, gh);
      r.worst_point = x;
    }
  }
  return r;
}

NoninteractionResiduals check_noninteraction(const MetriplecticSystem& sys,
                                             std::span<const Eigen::VectorXd> points,
                                             double tolerance) {
  NoninteractionResiduals r = noninteraction_residuals(sys, points);
  if (!(r.j_grad_s <= tolerance) || !(r.g_grad_h <= tolerance)) {
    throw Error(ErrorKind::NoninteractionViolation,
                "noninteraction fails: |J grad S| = " + fmt(r.j_grad_s) + ", |G grad H| = " +
                    fmt(r.g_grad_h) + ", worst at " + point_string(r.worst_point));
  }
  return r;
}

OdeBehavior closed_metriplectic_behavior(const MetriplecticSystem& sys, double step,
                                         double tolerance) {
  const auto probes = structure_probes(sys.n);
  check_metriplectic_structure(sys, probes);
  check_noninteraction(sys, probes);
  OdeBehavior behavior;
  behavior.field = {sys.n,
                    [sys](double, const Eigen::VectorXd& x) { return closed_rhs(sys, x); },
                    sys.name + ": x' = J grad H + G grad S"};
  behavior.step = step;
  behavior.residual_tolerance = tolerance;
  behavior.labels = sys.state_labels;
  return behavior;
}

DegeneracyAudit degeneracy_audit(const MetriplecticSystem& sys, const Trajectory& e) {
  if (e.dim() < sys.n) throw Error(ErrorKind::DimensionMismatch, "audit needs the state channels");
  Eigen::VectorXd energy(e.nodes());
  Eigen::VectorXd entropy(e.nodes());
  for (Index j = 0; j < e.nodes(); ++j) {
    const Eigen::VectorXd x = e.value(j).head(sys.n);
    energy(j) = sys.H(x);
    entropy(j) = sys.S(x);
  }
  const Eigen::VectorXd h_rate = time_derivative(energy, e.step());
  const Eigen::VectorXd s_rate = time_derivative(entropy, e.step());
  DegeneracyAudit audit;
  audit.energy_drift = (energy.array() - energy(0)).abs().maxCoeff();
  audit.max_energy_rate = h_rate.cwiseAbs().maxCoeff();
  audit.min_entropy_rate = s_rate.minCoeff();
  return audit;
}

std::pair<MatrixField, MatrixField> extended_metriplectic_structure(const MetriplecticSystem& sys) {
  const Index n = sys.n;
  const Index m = sys.m;
  MatrixField jx = [sys, n, m](const Eigen::VectorXd& xi) {
    const Eigen::VectorXd x = xi.head(n);
    const Eigen::MatrixXd b = sys.B(x);
    Eigen::MatrixXd out(n + m, n + m);
    out.topLeftCorner(n, n) = sys.J(x);
    out.topRightCorner(n, m) = b;
    out.bottomLeftCorner(m, n) = -b.transpose();
    out.bottomRightCorner(m, m) = sys.Jt(x);
    return out;
  };
  MatrixField gx = [sys, n](const Eigen::VectorXd& xi) {
    return extended_dissipation(sys, xi.head(n));
  };
  return {std::move(jx), std::move(gx)};
}

OdeBehavior extended_metriplectic_behavior(const MetriplecticSystem& sys, const AuxHamiltonian& aux_h,
                                           const AuxHamiltonian& aux_s, double step,
                                           double tolerance) {
  check_metriplectic_structure(sys, structure_probes(sys.n));
  if (aux_h.m != sys.m || aux_s.m != sys.m) {
    throw Error(ErrorKind::DimensionMismatch, "auxiliary potentials must act on m port coordinates");
  }
  OdeBehavior behavior;
  behavior.field = {sys.n + sys.m,
                    [sys, aux_h, aux_s](double s, const Eigen::VectorXd& xi) {
                      const Eigen::VectorXd zeta = xi.tail(sys.m);
                      return extended_rhs(sys, xi, aux_h.gradient(s, zeta), aux_s.gradient(s, zeta));
                    },
                    sys.name + " extended"};
  behavior.step = step;
  behavior.residual_tolerance = tolerance;
  behavior.labels = sys.extended_labels();
  return behavior;
}

std::vector<SideCondition> extended_side_conditions(const MetriplecticSystem& sys,
                                                    const Trajectory& e) {
  const NodeTag& th = require_tag(e, kAuxHamiltonianTag);
  const NodeTag& ts = require_tag(e, kAuxEntropyTag);
  if (e.dim() != sys.n + sys.m) {
    throw Error(ErrorKind::DimensionMismatch, "extended member needs n + m channels");
  }
  SideCondition jh{"J̃∇H_α ≡ 0", 0.0, 0};
  SideCondition gs{"G̃∇S_α ≡ 0", 0.0, 0};
  for (Index j = 0; j < e.nodes(); ++j) {
    const Eigen::VectorXd xi = e.value(j);
    const Eigen::VectorXd x = xi.head(sys.n);
    const Eigen::VectorXd zeta = xi.tail(sys.m);
    track(jh, inf_norm(sys.Jt(x) * aux_gradient(th, j, zeta)), j);
    track(gs, inf_norm(sys.Gt(x) * aux_gradient(ts, j, zeta)), j);
  }
  return {jh, gs};
}

void enforce(const std::vector<SideCondition>& conditions, const Trajectory& e, double tolerance) {
  for (const auto& c : conditions) {
    if (!(c.value <= tolerance)) {
      throw Error(ErrorKind::ConstraintViolation,
                  "condition '" + c.name + "' violated at node " + std::to_string(c.node) +
                      " (t = " + fmt(e.node_time(c.node)) + ", residual " + fmt(c.value) + ")");
    }
  }
}

Trajectory integrate_extended_metriplectic(const MetriplecticSystem& sys,
                                           const AuxHamiltonian& aux_h,
                                           const AuxHamiltonian& aux_s,
                                           const Eigen::VectorXd& xi0, double shift,
                                           double length, double h) {
  const OdeBehavior behavior = extended_metriplectic_behavior(sys, aux_h, aux_s, h);
  Trajectory e = integrate(behavior.field, xi0, shift, length, h, behavior.labels);
  e.set_tag(kAuxHamiltonianTag, aux_h.sample_on(e));
  e.set_tag(kAuxEntropyTag, aux_s.sample_on(e));
  enforce(extended_side_conditions(sys, e), e, 1e-8);
  return e;
}

double extended_metriplectic_residual(const MetriplecticSystem& sys, const Trajectory& e) {
  const NodeTag& th = require_tag(e, kAuxHamiltonianTag);
  const NodeTag& ts = require_tag(e, kAuxEntropyTag);
  if (e.dim() != sys.n + sys.m) {
    throw Error(ErrorKind::DimensionMismatch, "extended member needs n + m channels");
  }
  double r = stencil_residual(e, 0, sys.n + sys.m, [&](Index j) {
    const Eigen::VectorXd xi = e.value(j);
    const Eigen::VectorXd zeta = xi.tail(sys.m);
    return extended_rhs(sys, xi, aux_gradient(th, j, zeta), aux_gradient(ts, j, zeta));
  });
  for (const auto& c : extended_side_conditions(sys, e)) r = std::max(r, c.value);
  return r;
}

Trajectory embed_metriplectic(const MetriplecticSystem& sys, const Trajectory& e, double tolerance) {
  if (e.dim() != sys.n) {
    throw Error(ErrorKind::NotAMember, "closed member needs " + std::to_string(sys.n) + " channels");
  }
  const double r = stencil_residual(e, 0, sys.n, [&](Index j) { return closed_rhs(sys, e.value(j)); });
  if (!(r <= tolerance)) {
    throw Error(ErrorKind::NotAMember,
                "trajectory is not in the closed behaviour (residual " + fmt(r) + ")");
  }
  return embed_unchecked(sys, e);
}

IsoSystem port_metriplectic_system(const MetriplecticSystem& sys) {
  IsoSystem iso;
  iso.n = sys.n;
  iso.m = 2 * sys.m;
  iso.p = sys.m;
  const Index m = sys.m;
  iso.f = [sys, m](double, const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
    return (closed_rhs(sys, x) + sys.B(x) * w.head(m) + sys.A(x) * w.tail(m)).eval();
  };
  iso.g = [sys, m](double, const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
    return port_output(sys, x, w.head(m), w.tail(m));
  };
  iso.state_labels = sys.state_labels;
  iso.input_labels = concat(sys.input_labels(), sys.tau_labels());
  iso.output_labels = sys.output_labels();
  iso.description = sys.name + " port system";
  return iso;
}

std::vector<SideCondition> port_conditions(const MetriplecticSystem& sys, const Trajectory& e) {
  if (e.dim() != sys.n + 2 * sys.m) {
    throw Error(ErrorKind::DimensionMismatch, "port member needs (x, u, tau_in) channels");
  }
  std::vector<SideCondition> c = {{"J∇S ≡ 0", 0.0, 0},  {"G∇H ≡ 0", 0.0, 0},
                                  {"Bτ ≡ 0", 0.0, 0},   {"Au ≡ 0", 0.0, 0},
                                  {"Bᵀ∇S ≡ 0", 0.0, 0}, {"Aᵀ∇H ≡ 0", 0.0, 0},
                                  {"J̃τ ≡ 0", 0.0, 0},   {"G̃u ≡ 0", 0.0, 0}};
  for (Index j = 0; j < e.nodes(); ++j) {
    const Eigen::VectorXd v = e.value(j);
    const Eigen::VectorXd x = v.head(sys.n);
    const Eigen::VectorXd u = v.segment(sys.n, sys.m);
    const Eigen::VectorXd tau = v.tail(sys.m);
    const Eigen::VectorXd gh = sys.gradient_h(x);
    const Eigen::VectorXd gs = sys.gradient_s(x);
    const Eigen::MatrixXd b = sys.B(x);
    const Eigen::MatrixXd a = sys.A(x);
    track(c[0], inf_norm(sys.J(x) * gs), j);
    track(c[1], inf_norm(sys.G(x) * gh), j);
    track(c[2], inf_norm(b * tau), j);
    track(c[3], inf_norm(a * u), j);
    track(c[4], inf_norm(b.transpose() * gs), j);
    track(c[5], inf_norm(a.transpose() * gh), j);
    track(c[6], inf_norm(sys.Jt(x) * tau), j);
    track(c[7], inf_norm(sys.Gt(x) * u), j);
  }
  return c;
}

Machine port_metriplectic_machine(const MetriplecticSystem& sys, double tolerance, double step) {
  check_metriplectic_structure(sys, structure_probes(sys.n));
  const IsoSystem iso = port_metriplectic_system(sys);
  Machine machine = iso_machine(iso, tolerance, step);
  machine.behavior.membership = [sys, iso](const Trajectory& e) {
    double r = iso_residual(iso, e);
    for (const auto& c : port_conditions(sys, e)) r = std::max(r, c.value);
    return r;
  };
  return machine;
}

Trajectory simulate_port_metriplectic(const MetriplecticSystem& sys, const Eigen::VectorXd& x0,
                                      const InputCurve& u, const InputCurve& tau, double shift,
                                      double length, double h) {
  const Index m = sys.m;
  const InputCurve both = [u, tau, m](double s) {
    Eigen::VectorXd w(2 * m);
    w.head(m) = u(s);
    w.tail(m) = tau(s);
    return w;
  };
  return simulate_iso(port_metriplectic_system(sys), x0, both, shift, length, h);
}

RateAudit rate_audit(const MetriplecticSystem& sys, const Trajectory& iso_member) {
  if (iso_member.dim() != sys.n + 2 * sys.m) {
    throw Error(ErrorKind::DimensionMismatch, "rate audit needs (x, u, tau_in) channels");
  }
  const Index nodes = iso_member.nodes();
  Eigen::VectorXd energy(nodes);
  Eigen::VectorXd entropy(nodes);
  for (Index j = 0; j < nodes; ++j) {
    const Eigen::VectorXd x = iso_member.value(j).head(sys.n);
    energy(j) = sys.H(x);
    entropy(j) = sys.S(x);
  }
  const Eigen::VectorXd h_rate = time_derivative(energy, iso_member.step());
  const Eigen::VectorXd s_rate = time_derivative(entropy, iso_member.step());
  RateAudit audit;
  for (Index j = 0; j < nodes; ++j) {
    const Eigen::VectorXd v = iso_member.value(j);
    const Eigen::VectorXd x = v.head(sys.n);
    const Eigen::VectorXd forcing = sys.B(x) * v.segment(sys.n, sys.m) + sys.A(x) * v.tail(sys.m);
    const Eigen::VectorXd gh = sys.gradient_h(x);
    const Eigen::VectorXd gs = sys.gradient_s(x);
    audit.energy_defect = std::max(audit.energy_defect, std::abs(h_rate(j) - gh.dot(forcing)));
    audit.entropy_defect = std::max(
        audit.entropy_defect, std::abs(s_rate(j) - gs.dot(sys.G(x) * gs) - gs.dot(forcing)));
  }
  return audit;
}

double extended_psd_along(const MetriplecticSystem& sys, const Trajectory& e) {
  if (e.dim() < sys.n) throw Error(ErrorKind::DimensionMismatch, "needs the state channels");
  double worst = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < e.nodes(); ++j) {
    worst = std::min(worst, min_symmetric_eigenvalue(extended_dissipation(sys, e.value(j).head(sys.n))));
  }
  return worst;
}

SheafMorphism metriplectic_port_embedding(const MetriplecticSystem& sys, double sign) {
  return [sys, sign](const Trajectory& e) {
    const Index n = sys.n;
    const Index m = sys.m;
    if (e.dim() != n + 2 * m) {
      throw Error(ErrorKind::DimensionMismatch, "port member needs (x, u, tau_in) channels");
    }
    Eigen::MatrixXd outputs(e.nodes(), m);
    for (Index j = 0; j < e.nodes(); ++j) {
      const Eigen::VectorXd v = e.value(j);
      outputs.row(j) = port_output(sys, v.head(n), v.segment(n, m), v.tail(m)).transpose();
    }
    Eigen::MatrixXd values(e.nodes(), n + m);
    values.leftCols(n) = e.values().leftCols(n);
    values.rightCols(m) = -sign * cumulative_trapezoid(outputs, e.step());
    const Eigen::MatrixXd u = e.values().middleCols(n, m);
    const Eigen::MatrixXd tau = e.values().rightCols(m);
    Trajectory out = e.with_values(std::move(values), sys.extended_labels());
    out.set_tag(kAuxHamiltonianTag, linear_tag(u));
    out.set_tag(kAuxEntropyTag, linear_tag(tau));
    return out;
  };
}

PortControlDiagram metriplectic_diagram(const MetriplecticSystem& sys, double tolerance,
                                        double step) {
  PortControlDiagram d;
  d.options.tolerance = tolerance;
  d.options.constant_leg = Leg::a;
  const Index n = sys.n;
  const Index m = sys.m;
  const std::vector<std::string> a_labels = concat(sys.input_labels(), sys.tau_labels());

  SheafMorphism a_leg = [sys, a_labels](const Trajectory& e) {
    const NodeTag& th = require_tag(e, kAuxHamiltonianTag);
    const NodeTag& ts = require_tag(e, kAuxEntropyTag);
    const Index m = sys.m;
    Eigen::MatrixXd out(e.nodes(), 2 * m);
    for (Index j = 0; j < e.nodes(); ++j) {
      const Eigen::VectorXd zeta = e.value(j).tail(m);
      out.row(j).head(m) = aux_gradient(th, j, zeta).transpose();
      out.row(j).tail(m) = aux_gradient(ts, j, zeta).transpose();
    }
    return e.with_values(std::move(out), a_labels);
  };
  SheafMorphism e_leg = [sys](const Trajectory& e) {
    require_tag(e, kAuxHamiltonianTag);
    const Eigen::MatrixXd zeta = e.values().rightCols(sys.m);
    return e.with_values(-time_derivative(zeta, e.step()), sys.output_labels());
  };
  SheafMorphism embed = [sys](const Trajectory& e) { return embed_unchecked(sys, e); };

  d.enclosing.name = sys.name + " enclosing";
  d.enclosing.behavior.name = d.enclosing.name;
  d.enclosing.behavior.tolerance = tolerance;
  d.enclosing.behavior.membership = [sys](const Trajectory& e) {
    return extended_metriplectic_residual(sys, e);
  };
  d.enclosing.behavior.sampler = [sys, step](const Eigen::VectorXd& xi0, double length, double shift) {
    Eigen::VectorXd start = Eigen::VectorXd::Zero(sys.n + sys.m);
    if (xi0.size() == sys.n) {
      start.head(sys.n) = xi0;
    } else if (xi0.size() == sys.n + sys.m) {
      start = xi0;
    } else {
      throw Error(ErrorKind::DimensionMismatch, "initial data must hold states (and zeta)");
    }
    const auto zero = AuxHamiltonian::zero(sys.m);
    return integrate_extended_metriplectic(sys, zero, zero, start, shift, length, step);
  };
  d.enclosing.a_leg = a_leg;
  d.enclosing.e_leg = e_leg;
  d.enclosing.a_labels = a_labels;
  d.enclosing.e_labels = sys.output_labels();
  d.enclosing.naturality_tolerance = tolerance;

  d.closed.name = sys.name + " closed";
  d.closed.behavior = as_behavior_sheaf(closed_metriplectic_behavior(sys, step, tolerance));
  d.closed.a_leg = constant_leg();
  d.closed.e_leg = then(embed, e_leg);
  d.closed.e_labels = sys.output_labels();
  d.closed.naturality_tolerance = tolerance;

  d.port = port_metriplectic_machine(sys, tolerance, step);

  const std::vector<std::string> packed = concat(sys.state_labels, a_labels);
  d.psi.name = "psi";
  d.psi.beta = [n, m, packed](const Trajectory& e) {
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(e.nodes(), n + 2 * m);
    v.leftCols(n) = e.values();
    return e.with_values(std::move(v), packed);
  };
  d.psi.eta = identity_map();
  d.psi.alpha = zero_port(2 * m, a_labels);

  d.xi.name = "xi";
  d.xi.beta = metriplectic_port_embedding(sys);
  d.xi.eta = identity_map();
  d.xi.alpha = identity_map();

  d.a_phi.name = "embedding";
  d.a_phi.beta = embed;
  d.a_phi.eta = identity_map();
  d.a_phi.alpha = zero_port(2 * m, a_labels);
  return d;
}

DiagramReport build_metriplectic_diagram(const MetriplecticSystem& sys,
                                         std::span<const Trajectory> probes, double tolerance) {
  const double step = probes.empty() ? 1e-3 : probes.front().step();
  return metriplectic_diagram(sys, tolerance, step).verify(probes);
}

std::vector<Trajectory> metriplectic_probes(const MetriplecticSystem& sys, std::size_t count,
                                            std::uint64_t seed, double length, double step,
                                            double shift) {
  const OdeBehavior behavior = closed_metriplectic_behavior(sys, step);
  std::vector<Trajectory> out;
  out.reserve(count);
  for (const auto& x0 : probe_points(sys.n, count, seed, 2.0)) {
    out.push_back(integrate(behavior.field, x0, shift, length, step, behavior.labels));
  }
  return out;
}

}  // namespace portsheaf
