#include "test_util.hpp"

#include "portsheaf/interval_sheaf.hpp"
#include "portsheaf/ode_behavior.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace portsheaf {
namespace {

// --- Int ---------------------------------------------------------------------

TEST(IntCategory, CompositionAddsOffsets) {
  const IntMorphism outer(IntObject(1.0), IntObject(3.0), 1.0);
  const IntMorphism inner(IntObject(0.0), IntObject(1.0), 0.5);
  const IntMorphism c = compose_int(outer, inner);
  EXPECT_EQ(c.source().length(), 0.0);
  EXPECT_EQ(c.target().length(), 3.0);
  EXPECT_EQ(c.offset(), 1.5);
}

TEST(IntCategory, IdentityIsUnit) {
  const IntMorphism m(IntObject(0.5), IntObject(2.0), 0.75);
  const IntMorphism id = IntMorphism::identity(IntObject(2.0));
  const IntMorphism c = compose_int(id, m);
  EXPECT_EQ(c.offset(), m.offset());
  EXPECT_EQ(c.source().length(), m.source().length());
  EXPECT_EQ(c.target().length(), m.target().length());
}

TEST(IntCategory, EmptyHomAndDomainMismatch) {
  for (double x : {-1.0, 0.0, 0.5, 2.0}) {
    EXPECT_ERROR_KIND(IntMorphism(IntObject(3.0), IntObject(1.0), x), ErrorKind::EmptyHom);
  }
  EXPECT_ERROR_KIND(IntMorphism(IntObject(1.0), IntObject(2.0), 1.5), ErrorKind::EmptyHom);
  EXPECT_ERROR_KIND(IntMorphism(IntObject(1.0), IntObject(2.0), -0.1), ErrorKind::EmptyHom);
  EXPECT_ERROR_KIND(IntObject(-1.0), ErrorKind::OutOfRange);

  const IntMorphism a(IntObject(1.0), IntObject(2.0), 0.5);
  const IntMorphism b(IntObject(0.5), IntObject(1.5), 0.0);
  EXPECT_ERROR_KIND(compose_int(a, b), ErrorKind::DomainMismatch);
}

TEST(IntCategory, GridIndex) {
  EXPECT_EQ(grid_index(0.3, 0.1), 3);
  EXPECT_EQ(grid_index(0.0, 0.1), 0);
  EXPECT_FALSE(grid_index(0.35, 0.1).has_value());
}

// --- restrict ----------------------------------------------------------------

TEST(Restrict, IndexArithmetic) {
  Eigen::MatrixXd v(3, 1);
  v << 10, 11, 12;
  const Trajectory e(0.5, 0.2, v, {"x"});
  const Trajectory r = restrict(e, 0.5, 0.5);
  ASSERT_EQ(r.nodes(), 2);
  EXPECT_EQ(r.values()(0, 0), 11);
  EXPECT_EQ(r.values()(1, 0), 12);
  EXPECT_DOUBLE_EQ(r.shift(), 0.2 - 0.5);
  EXPECT_DOUBLE_EQ(r.length(), 0.5);
}

TEST(Restrict, IdentityLeavesTrajectoryUnchanged) {
  const Trajectory e = test::sampled([](double t) { return std::sin(t); }, 0.01, 100, 0.7);
  EXPECT_TRUE(identical(restrict(e, e.length(), 0.0), e));
  EXPECT_TRUE(identical(restrict(e, IntMorphism::identity(IntObject(e.length()))), e));
}

TEST(Restrict, BlowupClosedFormAtShiftedNode) {
  const Trajectory e = test::sampled([](double t) { return 1.0 / (1.0 - t); }, 0.01, 50);
  const Trajectory r = restrict(e, 0.25, 0.25);
  EXPECT_NEAR(r.values()(0, 0), 4.0 / 3.0, 1e-14);
  EXPECT_DOUBLE_EQ(r.shift(), -0.25);
  EXPECT_EQ(r.nodes(), 26);
}

TEST(Restrict, Errors) {
  const Trajectory e = test::sampled([](double t) { return t; }, 0.1, 10);
  EXPECT_ERROR_KIND(restrict(e, 0.5, 0.6), ErrorKind::OutOfRange);
  EXPECT_ERROR_KIND(restrict(e, 0.3, 0.05), ErrorKind::MisalignedOffset);
  EXPECT_ERROR_KIND(restrict(e, 0.25, 0.1), ErrorKind::MisalignedOffset);
  EXPECT_ERROR_KIND(restrict(e, 0.2, -0.1), ErrorKind::OutOfRange);
}

TEST(Restrict, AlongIntMorphism) {
  const Trajectory e = test::sampled([](double t) { return t; }, 0.1, 10);
  const Trajectory r = restrict(e, IntMorphism(IntObject(0.3), IntObject(1.0), 0.2));
  EXPECT_TRUE(identical(r, restrict(e, 0.3, 0.2)));
  EXPECT_ERROR_KIND(restrict(e, IntMorphism(IntObject(0.3), IntObject(2.0), 0.2)),
                    ErrorKind::DomainMismatch);
}

TEST(Restrict, ResampledMatchesAlignedAndInterpolates) {
  const Trajectory e = test::sampled([](double t) { return t * t * t; }, 0.1, 20);
  EXPECT_TRUE(sup_distance(restrict_resampled(e, 0.5, 0.3), restrict(e, 0.5, 0.3)) < 1e-12);
  // Cubic interpolation is exact for cubics.
  const Trajectory r = restrict_resampled(e, 0.5, 0.35);
  for (Index j = 0; j < r.nodes(); ++j) {
    const double t = 0.35 + r.node_time(j);
    EXPECT_NEAR(r.values()(j, 0), t * t * t, 1e-12);
  }
  EXPECT_NEAR(r.shift(), -0.35, 1e-15);
}

TEST(Restrict, FunctorialityIsBitExact) {
  std::mt19937_64 rng(7);
  const Trajectory e = test::sampled([](double t) { return std::exp(std::sin(3 * t)); }, 1e-3, 2000, 0.123);
  std::uniform_int_distribution<Index> pick(0, 2000);
  for (int trial = 0; trial < 200; ++trial) {
    const Index tau = pick(rng) % 1000;
    const Index t0 = pick(rng) % (2000 - tau + 1);
    const Index sigma = t0 == 0 ? 0 : pick(rng) % (t0 + 1);
    const Index s = t0 - sigma == 0 ? 0 : pick(rng) % (t0 - sigma + 1);
    const double h = e.step();
    EXPECT_TRUE(restriction_functorial(e, t0 * h, tau * h, s * h, sigma * h))
        << "t0=" << t0 << " tau=" << tau << " s=" << s << " sigma=" << sigma;
  }
}

TEST(Restrict, ShiftDecreasesByOffset) {
  const Trajectory e = test::sampled([](double t) { return t; }, 0.125, 16, 3.0);
  for (Index k = 0; k <= 16; ++k) {
    const double tau = k * 0.125;
    EXPECT_EQ(restrict(e, 2.0 - tau, tau).shift(), 3.0 - tau);
  }
}

// --- glue ----------------------------------------------------------------------

TEST(Glue, Constants) {
  const Trajectory left(0.5, 1.0, Eigen::MatrixXd::Constant(3, 1, 2.5), {"x"});
  const Trajectory right(0.5, 0.0, Eigen::MatrixXd::Constant(5, 1, 2.5), {"x"});
  const Trajectory g = glue(left, right);
  EXPECT_EQ(g.nodes(), 7);
  EXPECT_DOUBLE_EQ(g.length(), 3.0);
  EXPECT_EQ(g.shift(), 1.0);
  EXPECT_TRUE((g.values().array() == 2.5).all());
  EXPECT_TRUE(identical(restrict(g, 1.0, 0.0), left));
  EXPECT_TRUE(identical(restrict(g, 2.0, 1.0), right));
}

TEST(Glue, BlowupPiecesReproduceClosedForm) {
  const double h = 1e-3;
  const Trajectory left = integrate(blowup_field(), Eigen::VectorXd::Constant(1, 1.0), 0.0, 0.4, h);
  const Trajectory right =
      integrate(blowup_field(), Eigen::VectorXd::Constant(1, 1.0 / 0.6), left.shift() - 0.4, 0.4, h);
  const Trajectory g = glue(left, right, 1e-8);
  ASSERT_EQ(g.nodes(), 801);
  for (Index j = 0; j < g.nodes(); ++j) {
    const double t = g.node_time(j);
    EXPECT_LT(test::rel_err(g.values()(j, 0), 1.0 / (1.0 - t)), 1e-9) << "t=" << t;
  }
}

TEST(Glue, Errors) {
  const Trajectory left(0.5, 0.0, Eigen::MatrixXd::Constant(3, 1, 1.0), {"x"});
  const Trajectory bad_value(0.5, -1.0, Eigen::MatrixXd::Constant(3, 1, 1.1), {"x"});
  const Trajectory bad_shift(0.5, 0.0, Eigen::MatrixXd::Constant(3, 1, 1.0), {"x"});
  const Trajectory bad_grid(0.25, -1.0, Eigen::MatrixXd::Constant(3, 1, 1.0), {"x"});
  const Trajectory bad_labels(0.5, -1.0, Eigen::MatrixXd::Constant(3, 1, 1.0), {"y"});
  EXPECT_ERROR_KIND(glue(left, bad_value, 1e-9), ErrorKind::JunctionMismatch);
  EXPECT_ERROR_KIND(glue(left, bad_shift), ErrorKind::ShiftMismatch);
  EXPECT_ERROR_KIND(glue(left, bad_grid), ErrorKind::GridMismatch);
  EXPECT_ERROR_KIND(glue(left, bad_labels), ErrorKind::GridMismatch);
}

TEST(Glue, RoundTripOfRestrictionsIsBitExact) {
  const Trajectory e = test::sampled([](double t) { return std::cos(7 * t) + t; }, 1e-3, 1500, -0.4);
  for (Index cut = 1; cut < 1500; cut += 37) {
    const double c = cut * e.step();
    const Trajectory g = glue(restrict(e, c, 0.0), restrict(e, e.length() - c, c));
    EXPECT_TRUE(identical(g, e)) << "cut node " << cut;
  }
}

TEST(Glue, TagsTravelWithPieces) {
  Trajectory e = test::sampled([](double t) { return t; }, 0.1, 10);
  Eigen::MatrixXd s(11, 1);
  for (Index j = 0; j <= 10; ++j) s(j, 0) = static_cast<double>(j);
  e.set_tag("aux", {"linear", s, {}});
  const Trajectory r = restrict(e, 0.4, 0.3);
  ASSERT_NE(r.tag("aux"), nullptr);
  EXPECT_EQ(r.tag("aux")->samples(0, 0), 3.0);
  EXPECT_TRUE(identical(glue(restrict(e, 0.3, 0.0), restrict(e, 0.7, 0.3)), e));
}

// --- sheaf axioms ------------------------------------------------------------

TEST(SheafAxioms, ConstantSheafTokens) {
  const BehaviorSheaf one = constant_sheaf(1);
  const Trajectory t = Trajectory::token(0, 2.0, 0.5, 1.0);
  EXPECT_TRUE(one.contains(t));
  EXPECT_FALSE(one.contains(Trajectory::token(1, 2.0, 0.5)));
  EXPECT_FALSE(one.contains(test::sampled([](double) { return 0.0; }, 0.5, 4)));

  const Trajectory r = one.restrict(t, 1.0, 0.5);
  ASSERT_TRUE(r.token_id().has_value());
  EXPECT_EQ(*r.token_id(), 0);
  EXPECT_TRUE(one.contains(r));

  const Trajectory g = glue(restrict(t, 0.5, 0.0), restrict(t, 1.5, 0.5));
  EXPECT_TRUE(identical(g, t));

  EXPECT_ERROR_KIND(glue(Trajectory::token(0, 1.0, 0.5), Trajectory::token(1, 1.0, 0.5, -1.0)),
                    ErrorKind::JunctionMismatch);
  EXPECT_ERROR_KIND(constant_sheaf(0), ErrorKind::OutOfRange);
}

TEST(SheafAxioms, ConstantSheafSeparation) {
  const BehaviorSheaf two = constant_sheaf(2);
  const std::vector<Trajectory> probes{Trajectory::token(0, 1.0, 0.25), Trajectory::token(1, 1.0, 0.25)};
  const std::vector<double> cuts{0.25, 0.5};
  const AxiomReport rep = check_sheaf_axioms(two, probes, cuts);
  EXPECT_TRUE(rep.pass());
  EXPECT_EQ(rep.checks.size(), 4u);
  // The two tokens stay distinct after restriction.
  EXPECT_NE(*restrict(probes[0], 0.5, 0.25).token_id(), *restrict(probes[1], 0.5, 0.25).token_id());
}

TEST(SheafAxioms, OdeBehaviorSeparationAndGluing) {
  OdeBehavior b{linear_field((Eigen::Matrix2d() << 0, 1, -1, -0.2).finished()), 1e-3, "rk4", 1e-5, {}};
  const BehaviorSheaf sheaf = as_behavior_sheaf(b);
  std::vector<Trajectory> probes;
  for (int i = 0; i < 4; ++i) {
    probes.push_back(sheaf.sampler(Eigen::Vector2d(1.0 - 0.5 * i, 0.3 * i), 1.0, 0.1 * i));
  }
  const std::vector<double> cuts{0.25, 0.5, 0.9};
  const AxiomReport rep = check_sheaf_axioms(sheaf, probes, cuts);
  EXPECT_TRUE(rep.pass());
  EXPECT_EQ(rep.separation_violations(), 0u);
  for (const auto& c : rep.checks) {
    EXPECT_TRUE(c.glue_exact);
    EXPECT_GE(c.separation_candidates, 1u);  // the independent restart
  }
}

TEST(SheafAxioms, NonMemberProbeAndOffGridCut) {
  OdeBehavior b{ramp_field(), 1e-2, "rk4", 1e-5, {}};
  const BehaviorSheaf sheaf = as_behavior_sheaf(b);
  const std::vector<Trajectory> bad{test::sampled([](double) { return 1.0; }, 1e-2, 100)};
  const std::vector<double> cuts{0.5};
  EXPECT_ERROR_KIND(check_sheaf_axioms(sheaf, bad, cuts), ErrorKind::NotAMember);
  const std::vector<Trajectory> good{sheaf.sampler(Eigen::VectorXd::Zero(1), 1.0, 0.0)};
  const std::vector<double> off{0.505};
  EXPECT_ERROR_KIND(check_sheaf_axioms(sheaf, good, off), ErrorKind::MisalignedOffset);
}

}  // namespace
}  // namespace portsheaf
