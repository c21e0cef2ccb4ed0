#include "test_util.hpp"

#include "portsheaf/metriplectic.hpp"
#include "portsheaf/port_hamiltonian.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace portsheaf {
namespace {

double worst(const DiagramReport& rep, const std::string& name) {
  for (const auto& [n, v] : rep.worst_by_name()) {
    if (n == name) return v;
  }
  return -1.0;
}

const SideCondition& condition(const std::vector<SideCondition>& cs, const std::string& name) {
  for (const auto& c : cs) {
    if (c.name == name) return c;
  }
  throw std::runtime_error("no condition " + name);
}

Polynomial half_square(Index n) { return Polynomial::quadratic(Eigen::MatrixXd::Identity(n, n)); }

InputCurve scalar_curve(std::function<double(double)> f) {
  return [f = std::move(f)](double s) { return Eigen::VectorXd::Constant(1, f(s)); };
}

TEST(Metriplectic, RigidBodyNoninteraction) {
  const MetriplecticSystem sys = rigid_body_system();
  const auto pts = probe_points(3, 100, 17, 2.0);
  const NoninteractionResiduals r = check_noninteraction(sys, pts);
  EXPECT_LE(r.j_grad_s, 1e-10);
  EXPECT_LE(r.g_grad_h, 1e-10);
  const MetriplecticStructure s = check_metriplectic_structure(sys, pts);
  EXPECT_LE(s.antisymmetry, 1e-15);
  EXPECT_GE(s.min_eigenvalue, -1e-12);
  EXPECT_GE(s.extended_min_eigenvalue, -1e-12);
  // The port column is orthogonal to grad S.
  for (const auto& x : pts) EXPECT_LE(std::abs(sys.B(x).col(0).dot(sys.gradient_s(x))), 1e-14);
  EXPECT_EQ(sys.extended_labels(), (std::vector<std::string>{"x1", "x2", "x3", "zeta_r"}));
  EXPECT_EQ(sys.tau_labels(), std::vector<std::string>{"tau_in_r"});
  EXPECT_ERROR_KIND(rigid_body_system({1, 0, 3}), ErrorKind::ConfigError);
}

TEST(Metriplectic, RigidBodyProjectorAlgebra) {
  // G is a scaled projector onto the complement of grad H: G^2 = gamma G.
  const double gamma = 0.1;
  const MetriplecticSystem sys = rigid_body_system({1, 2, 3}, gamma);
  for (const auto& x : probe_points(3, 10, 4)) {
    const Eigen::MatrixXd g = sys.G(x);
    EXPECT_LE((g * g - gamma * g).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE(symmetry_defect(g), 0.0);
  }
  EXPECT_EQ(sys.G(Eigen::Vector3d::Zero()), Eigen::MatrixXd(gamma * Eigen::Matrix3d::Identity()));
}

TEST(Metriplectic, RigidBodyDegeneracyAlongTrajectories) {
  const MetriplecticSystem sys = rigid_body_system();
  const auto probes = metriplectic_probes(sys, 5, 3, 10.0);
  for (const auto& e : probes) {
    const DegeneracyAudit a = degeneracy_audit(sys, e);
    EXPECT_LE(a.energy_drift, 1e-6);
    EXPECT_LE(a.max_energy_rate, 1e-6);
    EXPECT_GE(a.min_entropy_rate, -1e-8);
  }
}

TEST(Metriplectic, EntropyRateMatchesDissipation) {
  const MetriplecticSystem sys = rigid_body_system();
  const OdeBehavior b = closed_metriplectic_behavior(sys);
  const Trajectory e = integrate(b.field, Eigen::Vector3d(1, 0.5, 0.2), 0.0, 2.0, 1e-3);
  // Closed trajectories are port members with zero inputs.
  Eigen::MatrixXd packed = Eigen::MatrixXd::Zero(e.nodes(), 5);
  packed.leftCols(3) = e.values();
  const Trajectory iso = e.with_values(packed, {"x1", "x2", "x3", "u_r", "tau_in_r"});
  const RateAudit r = rate_audit(sys, iso);
  EXPECT_LE(r.energy_defect, 1e-6);
  EXPECT_LE(r.entropy_defect, 1e-5);
}

TEST(Metriplectic, WithoutDissipationEntropyIsStationary) {
  Eigen::Matrix3d j = Eigen::Matrix3d::Zero();
  j(0, 1) = 1;
  j(1, 0) = -1;
  const MetriplecticSystem sys = linear_metriplectic_system(
      j, Eigen::Matrix3d::Zero(), Eigen::MatrixXd::Zero(3, 1), Eigen::MatrixXd::Zero(3, 1),
      Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1), half_square(3),
      Polynomial({{0, 0, 2}}, {0.5}));
  for (const auto& e : metriplectic_probes(sys, 3, 2, 5.0)) {
    const DegeneracyAudit a = degeneracy_audit(sys, e);
    EXPECT_LE(std::abs(a.min_entropy_rate), 1e-12);
    EXPECT_LE(a.energy_drift, 1e-8);
  }
}

TEST(Metriplectic, InjectedInteractionIsRejected) {
  const MetriplecticSystem sys = linear_metriplectic_system(
      Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Identity(), Eigen::MatrixXd::Zero(2, 1),
      Eigen::MatrixXd::Zero(2, 1), Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1),
      half_square(2), Polynomial({{0, 0}}, {1.0}));
  std::string msg;
  EXPECT_EQ(test::thrown_kind([&] { closed_metriplectic_behavior(sys); }, &msg),
            ErrorKind::NoninteractionViolation);
  EXPECT_NE(msg.find("worst at"), std::string::npos) << msg;
}

TEST(Metriplectic, StructureViolations) {
  const Eigen::MatrixXd z1 = Eigen::MatrixXd::Zero(1, 1);
  const Eigen::MatrixXd z21 = Eigen::MatrixXd::Zero(2, 1);
  // G indefinite.
  EXPECT_ERROR_KIND(check_metriplectic_structure(
                        linear_metriplectic_system(Eigen::Matrix2d::Zero(), -Eigen::Matrix2d::Identity(), z21,
                                                   z21, z1, z1, half_square(2), half_square(2)),
                        structure_probes(2)),
                    ErrorKind::StructureViolation);
  // Jt symmetric.
  EXPECT_ERROR_KIND(check_metriplectic_structure(
                        linear_metriplectic_system(Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Zero(), z21,
                                                   z21, Eigen::MatrixXd::Ones(1, 1), z1, half_square(2),
                                                   half_square(2)),
                        structure_probes(2)),
                    ErrorKind::StructureViolation);
  // A couples into a port without dissipation: [[G, A], [A^T, 0]] is indefinite.
  EXPECT_ERROR_KIND(check_metriplectic_structure(
                        linear_metriplectic_system(Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Identity(), z21,
                                                   Eigen::MatrixXd::Ones(2, 1), z1, z1, half_square(2),
                                                   half_square(2)),
                        structure_probes(2)),
                    ErrorKind::StructureViolation);
}

TEST(Metriplectic, ExtendedStructure) {
  const MetriplecticSystem sys = rigid_body_system();
  const auto [jx, gx] = extended_metriplectic_structure(sys);
  for (const auto& xi : probe_points(4, 20, 8)) {
    EXPECT_LE(antisymmetry_defect(jx(xi)), 1e-12);
    EXPECT_GE(min_symmetric_eigenvalue(gx(xi)), -1e-10);
    EXPECT_EQ(jx(xi).topRightCorner(3, 1), sys.B(xi.head(3)));
  }

  // No ports coupling: block diagonal.
  const MetriplecticSystem free_body = linear_metriplectic_system(
      (Eigen::MatrixXd(2, 2) << 0, 1, -1, 0).finished(), Eigen::Matrix2d::Zero(), Eigen::MatrixXd::Zero(2, 1),
      Eigen::MatrixXd::Zero(2, 1), Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1), half_square(2),
      Polynomial({{0, 0}}, {0.0}));
  const auto [j2, g2] = extended_metriplectic_structure(free_body);
  const Eigen::Vector3d xi(1, 2, 3);
  EXPECT_EQ(j2(xi).col(2), Eigen::VectorXd(Eigen::Vector3d::Zero()));
  EXPECT_EQ(g2(xi), Eigen::MatrixXd(Eigen::Matrix3d::Zero()));
}

TEST(Metriplectic, ExtendedDissipationFollowsG) {
  // B couples, A = 0 and Gt = 0: the extended dissipation is G padded with zeros.
  const Eigen::Matrix2d g = (Eigen::Matrix2d() << 2, 1, 1, 1).finished();
  const MetriplecticSystem sys = linear_metriplectic_system(
      Eigen::Matrix2d::Zero(), g, (Eigen::MatrixXd(2, 1) << 0, 1).finished(), Eigen::MatrixXd::Zero(2, 1),
      Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1), Polynomial({{0, 0}}, {0.0}), half_square(2));
  const auto [jx, gx] = extended_metriplectic_structure(sys);
  const Eigen::MatrixXd ext = gx(Eigen::Vector3d(0.1, 0.2, 0.3));
  EXPECT_EQ(ext.topLeftCorner(2, 2), Eigen::MatrixXd(g));
  EXPECT_NEAR(min_symmetric_eigenvalue(ext), std::min(0.0, min_symmetric_eigenvalue(g)), 1e-14);
}

TEST(Metriplectic, EmbeddedClosedTrajectoriesAreExtendedMembers) {
  const MetriplecticSystem sys = rigid_body_system();
  for (const auto& e : metriplectic_probes(sys, 3, 5, 5.0)) {
    const Trajectory z = embed_metriplectic(sys, e);
    EXPECT_LE(extended_metriplectic_residual(sys, z), 1e-6);
    // With A = 0 the embedding is the Hamiltonian formula.
    Eigen::MatrixXd integrand(e.nodes(), 1);
    for (Index j = 0; j < e.nodes(); ++j) {
      integrand(j, 0) = sys.B(e.value(j)).col(0).dot(sys.gradient_h(e.value(j)));
    }
    EXPECT_LE((z.values().col(3) + cumulative_trapezoid(integrand, e.step()).col(0)).cwiseAbs().maxCoeff(), 1e-14);
  }
  const Trajectory bad(1e-3, 0.0, Eigen::MatrixXd::Ones(50, 3), {});
  EXPECT_ERROR_KIND(embed_metriplectic(sys, bad), ErrorKind::NotAMember);
}

TEST(Metriplectic, EmbeddingWithoutPortsIsZero) {
  Eigen::Matrix3d j = Eigen::Matrix3d::Zero();
  j(0, 1) = 1;
  j(1, 0) = -1;
  const MetriplecticSystem sys = linear_metriplectic_system(
      j, Eigen::Matrix3d::Zero(), Eigen::MatrixXd::Zero(3, 1), Eigen::MatrixXd::Zero(3, 1),
      Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1), half_square(3), Polynomial({{0, 0, 2}}, {0.5}));
  for (const auto& e : metriplectic_probes(sys, 2, 1, 2.0)) {
    EXPECT_TRUE((embed_metriplectic(sys, e).values().col(3).array() == 0.0).all());
  }
}

TEST(Metriplectic, ExtendedRunWithLinearPotential) {
  const MetriplecticSystem sys = rigid_body_system();
  const AuxHamiltonian u = AuxHamiltonian::linear(1, scalar_curve([](double s) { return 0.5 * std::sin(s); }));
  const Trajectory e = integrate_extended_metriplectic(sys, u, AuxHamiltonian::zero(1),
                                                       Eigen::Vector4d(1, 0.5, 0.2, 0), 0.0, 5.0, 1e-3);
  EXPECT_LE(extended_metriplectic_residual(sys, e), 1e-6);
  for (const auto& c : extended_side_conditions(sys, e)) EXPECT_EQ(c.value, 0.0) << c.name;
  Trajectory untagged = e;
  untagged.clear_tags();
  EXPECT_ERROR_KIND(extended_metriplectic_residual(sys, untagged), ErrorKind::MissingAuxTag);
}

TEST(Metriplectic, PortRotationViolatesSideCondition) {
  const Eigen::Matrix2d jt = (Eigen::Matrix2d() << 0, 1, -1, 0).finished();
  const MetriplecticSystem sys = linear_metriplectic_system(
      (Eigen::MatrixXd(2, 2) << 0, 1, -1, 0).finished(), Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Identity(),
      Eigen::Matrix2d::Zero(), jt, Eigen::Matrix2d::Zero(), half_square(2), Polynomial({{0, 0}}, {0.0}));
  const AuxHamiltonian u = AuxHamiltonian::linear(2, [](double) { return Eigen::Vector2d(1.0, 0.0).eval(); });
  std::string msg;
  EXPECT_EQ(test::thrown_kind(
                [&] {
                  integrate_extended_metriplectic(sys, u, AuxHamiltonian::zero(2), Eigen::Vector4d(1, 0, 0, 0),
                                                  0.0, 1.0, 1e-3);
                },
                &msg),
            ErrorKind::ConstraintViolation);
  EXPECT_NE(msg.find("J̃∇H_α ≡ 0"), std::string::npos) << msg;
  EXPECT_NE(msg.find("node 0"), std::string::npos) << msg;
  // A zero potential satisfies the condition.
  EXPECT_NO_THROW(integrate_extended_metriplectic(sys, AuxHamiltonian::zero(2), AuxHamiltonian::zero(2),
                                                  Eigen::Vector4d(1, 0, 0, 0), 0.0, 1.0, 1e-3));
}

// --- port class -------------------------------------------------------------------

TEST(Metriplectic, ZeroInputsReduceToClosed) {
  const MetriplecticSystem sys = rigid_body_system();
  const InputCurve zero = scalar_curve([](double) { return 0.0; });
  const Trajectory e = simulate_port_metriplectic(sys, Eigen::Vector3d(1, 0.5, 0.2), zero, zero, 0.0, 3.0, 1e-3);
  const OdeBehavior b = closed_metriplectic_behavior(sys);
  const Trajectory closed = integrate(b.field, Eigen::Vector3d(1, 0.5, 0.2), 0.0, 3.0, 1e-3);
  EXPECT_LE((e.values().leftCols(3) - closed.values()).cwiseAbs().maxCoeff(), 1e-14);
  const Trajectory y = iso_output(port_metriplectic_system(sys), e);
  for (Index j = 0; j < e.nodes(); j += 100) {
    const Eigen::VectorXd x = e.value(j).head(3);
    const double want = sys.B(x).col(0).dot(sys.gradient_h(x)) - sys.A(x).col(0).dot(sys.gradient_s(x));
    EXPECT_NEAR(y.values()(j, 0), want, 1e-15);
  }
}

TEST(Metriplectic, CompliantRunPassesRateAudit) {
  const MetriplecticSystem sys = rigid_body_system();
  const Trajectory e = simulate_port_metriplectic(sys, Eigen::Vector3d(1, 0.5, 0.2),
                                                  scalar_curve([](double s) { return 0.5 * std::sin(s); }),
                                                  scalar_curve([](double) { return 0.0; }), 0.0, 10.0, 1e-3);
  const auto conds = port_conditions(sys, e);
  ASSERT_EQ(conds.size(), 8u);
  for (const auto& c : conds) EXPECT_LE(c.value, 1e-8) << c.name;
  EXPECT_NO_THROW(enforce(conds, e, 1e-8));
  const RateAudit r = rate_audit(sys, e);
  EXPECT_LE(r.energy_defect, 1e-5);
  EXPECT_LE(r.entropy_defect, 1e-5);
  EXPECT_TRUE(port_metriplectic_machine(sys).behavior.contains(e));
  EXPECT_GE(extended_psd_along(sys, e), -1e-10);
}

TEST(Metriplectic, InputOutsideKernelIsNamed) {
  const MetriplecticSystem sys = rigid_body_system();
  const Trajectory e = simulate_port_metriplectic(sys, Eigen::Vector3d(1, 0.5, 0.2),
                                                  scalar_curve([](double) { return 0.0; }),
                                                  scalar_curve([](double s) { return s > 1.0 ? 0.3 : 0.0; }),
                                                  0.0, 2.0, 1e-3);
  const auto conds = port_conditions(sys, e);
  EXPECT_GT(condition(conds, "Bτ ≡ 0").value, 1e-8);
  EXPECT_GT(condition(conds, "Bτ ≡ 0").node, 1000);
  std::string msg;
  EXPECT_EQ(test::thrown_kind([&] { enforce(conds, e, 1e-8); }, &msg), ErrorKind::ConstraintViolation);
  EXPECT_NE(msg.find("'Bτ ≡ 0'"), std::string::npos) << msg;
  EXPECT_FALSE(port_metriplectic_machine(sys).behavior.contains(e));
}

// --- diagram ---------------------------------------------------------------------

TEST(Metriplectic, RigidBodyDiagramPasses) {
  const MetriplecticSystem sys = rigid_body_system();
  const auto probes = metriplectic_probes(sys, 5, 0, 5.0);
  const DiagramReport rep = build_metriplectic_diagram(sys, probes, 1e-5);
  EXPECT_TRUE(rep.pass) << to_json(rep).dump(2);
  EXPECT_EQ(worst(rep, "triangle.beta"), 0.0);
}

TEST(Metriplectic, PortlessDiagramPasses) {
  const MetriplecticSystem sys = rigid_body_system({1, 2, 3}, 0.1, false);
  const auto probes = metriplectic_probes(sys, 3, 1, 2.0);
  const PortControlDiagram d = metriplectic_diagram(sys);
  const DiagramReport rep = d.verify(probes);
  EXPECT_TRUE(rep.pass) << to_json(rep).dump(2);
  EXPECT_EQ(d.closed.e_leg(probes[0]).dim(), 0);
}

TEST(Metriplectic, FlippedQuadratureFails) {
  const MetriplecticSystem sys = rigid_body_system();
  const auto probes = metriplectic_probes(sys, 5, 0, 5.0);
  PortControlDiagram d = metriplectic_diagram(sys);
  d.xi.beta = metriplectic_port_embedding(sys, -1.0);
  const DiagramReport rep = d.verify(probes);
  EXPECT_FALSE(rep.pass);
  EXPECT_GT(worst(rep, "triangle.beta"), 1e-5);
}

}  // namespace
}  // namespace portsheaf
