#include "portsheaf/aux_hamiltonian.hpp"

#include "portsheaf/errors.hpp"

#include <cmath>

namespace portsheaf {

std::string_view to_string(AuxKind kind) noexcept {
  switch (kind) {
    case AuxKind::zero: return "zero";
    case AuxKind::linear: return "linear";
    case AuxKind::quadratic: return "quadratic";
  }
  return "zero";
}

AuxHamiltonian AuxHamiltonian::zero(Index m) {
  AuxHamiltonian a;
  a.kind = AuxKind::zero;
  a.m = m;
  return a;
}

AuxHamiltonian AuxHamiltonian::linear(Index m, std::function<Eigen::VectorXd(double)> u) {
  AuxHamiltonian a;
  a.kind = AuxKind::linear;
  a.m = m;
  a.curve = std::move(u);
  return a;
}

AuxHamiltonian AuxHamiltonian::quadratic(std::function<double(double)> kappa, Eigen::MatrixXd q) {
  if (q.rows() != q.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "quadratic auxiliary form must be square");
  }
  AuxHamiltonian a;
  a.kind = AuxKind::quadratic;
  a.m = q.rows();
  a.curve = [kappa = std::move(kappa)](double s) { return Eigen::VectorXd::Constant(1, kappa(s)); };
  a.form = 0.5 * (q + q.transpose());
  return a;
}

double AuxHamiltonian::value(double s, const Eigen::VectorXd& zeta) const {
  switch (kind) {
    case AuxKind::zero: return 0.0;
    case AuxKind::linear: return curve(s).dot(zeta);
    case AuxKind::quadratic: return 0.5 * curve(s)(0) * zeta.dot(form * zeta);
  }
  return 0.0;
}

Eigen::VectorXd AuxHamiltonian::gradient(double s, const Eigen::VectorXd& zeta) const {
  switch (kind) {
    case AuxKind::zero: return Eigen::VectorXd::Zero(m);
    case AuxKind::linear: return curve(s);
    case AuxKind::quadratic: return curve(s)(0) * (form * zeta);
  }
  return Eigen::VectorXd::Zero(m);
}

NodeTag AuxHamiltonian::sample_on(const Trajectory& e) const {
  NodeTag tag;
  tag.kind = std::string(to_string(kind));
  const Index width = kind == AuxKind::zero ? 0 : (kind == AuxKind::linear ? m : 1);
  tag.samples = Eigen::MatrixXd::Zero(e.nodes(), width);
  if (kind != AuxKind::zero) {
    for (Index j = 0; j < e.nodes(); ++j) {
      const Eigen::VectorXd c = curve(e.field_time(j));
      if (c.size() != width || !c.allFinite()) {
        throw Error(ErrorKind::StructureViolation,
                    "auxiliary curve is not a finite " + std::to_string(width) +
                        "-vector at node " + std::to_string(j));
      }
      tag.samples.row(j) = c.transpose();
    }
  }
  if (kind == AuxKind::quadratic) tag.fixed = form;
  return tag;
}

Eigen::VectorXd aux_gradient(const NodeTag& tag, Index node, const Eigen::VectorXd& zeta) {
  if (tag.kind == "zero") return Eigen::VectorXd::Zero(zeta.size());
  if (tag.kind == "linear") return tag.samples.row(node).transpose();
  if (tag.kind == "quadratic") return tag.samples(node, 0) * (tag.fixed * zeta);
  throw Error(ErrorKind::MissingAuxTag, "unknown auxiliary kind '" + tag.kind + "'");
}

double aux_value(const NodeTag& tag, Index node, const Eigen::VectorXd& zeta) {
  if (tag.kind == "zero") return 0.0;
  if (tag.kind == "linear") return tag.samples.row(node).dot(zeta.transpose());
  if (tag.kind == "quadratic") return 0.5 * tag.samples(node, 0) * zeta.dot(tag.fixed * zeta);
  throw Error(ErrorKind::MissingAuxTag, "unknown auxiliary kind '" + tag.kind + "'");
}

NodeTag linear_tag(const Eigen::MatrixXd& samples) {
  return {"linear", samples, Eigen::MatrixXd()};
}

NodeTag zero_tag(Index nodes) {
  return {"zero", Eigen::MatrixXd::Zero(nodes, 0), Eigen::MatrixXd()};
}

}  // namespace portsheaf
