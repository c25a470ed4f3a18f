#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bvpa/blowup.hpp"
#include "bvpa/pipeline.hpp"

using namespace bvpa;

TEST(Convergence, CsvRowsAndRates) {
  const auto t = convergence_study(ExprField::from_text({"x^2"}), {0.2, 0.1, 0.05});
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_FALSE(t.rows[0].rate.has_value());
  for (std::size_t i = 1; i < 3; ++i) EXPECT_NEAR(*t.rows[i].rate, 1.0, 0.1);
  ASSERT_TRUE(t.fitted_rate.has_value());
  EXPECT_NEAR(*t.fitted_rate, 1.0, 0.1);
  const std::string csv = to_csv(t);
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "k,grad_error,omega_3k,ratio,rate");
  std::getline(is, line);
  EXPECT_EQ(line.substr(0, 4), "0.2,");
  EXPECT_EQ(line.substr(line.size() - 3), ",NA");
}

TEST(Convergence, AffineFieldHasUndefinedRatios) {
  const auto t = convergence_study(ExprField::from_text({"2*x + y"}), {0.3, 0.15});
  for (const auto& r : t.rows) {
    EXPECT_LT(r.grad_error, kNegligibleError);
    EXPECT_FALSE(r.ratio.has_value());
    EXPECT_FALSE(r.rate.has_value());
  }
  EXPECT_FALSE(t.fitted_rate.has_value());
  EXPECT_NE(to_csv(t).find("NA,NA"), std::string::npos);
}

TEST(Convergence, Preconditions) {
  const auto u = ExprField::from_text({"x"});
  auto check = [](auto&& f, const std::string& name) {
    try {
      f();
      ADD_FAILURE() << "expected " << name;
    } catch (const PreconditionError& e) {
      EXPECT_EQ(e.check(), name);
    }
  };
  check([&] { convergence_study(u, {}); }, "nonempty_k_list");
  check([&] { convergence_study(u, {0.1, -0.1}); }, "positive_k");
  check([&] { convergence_study(u, {0.1, 0.2}); }, "decreasing_k");
  check([&] { convergence_study(standard_jump_field(), {0.1}); }, "sobolev_field");
}

TEST(SmoothCube, L1GapMatchesClosedForm) {
  // u - w = |x - x0|^2, whose integral over the cube of half side r is 8 r^4 / 3.
  const auto u = ExprField::from_text({"x^2 + y^2"});
  // On the boundary it integrates to 32 r^3 / 3.
  const Report rep = smooth_cube_demo(u, {0.5, 0.5}, {0.2, 0.1, 0.05, 0.02}, 0.1);
  for (double r : {0.02, 0.05, 0.1, 0.2}) {
    const std::string tag = "r=" + format_number(r) + ":";
    EXPECT_NEAR(rep.check(tag + "l1").measured, 8 * std::pow(r, 4) / 3, 1e-12);
    EXPECT_NEAR(rep.check(tag + "boundary").measured, 32 * std::pow(r, 3) / 3, 1e-12);
  }
  EXPECT_EQ(rep.get("threshold_found"), 1.0);
  // The boundary check needs 32 r^3 / 3 < 4 eps r^2, i.e. r < 0.0375.
  EXPECT_EQ(rep.get("threshold_r"), 0.02);
  EXPECT_THROW(smooth_cube_demo(u, {0.1, 0.5}, {0.2}, 0.1), PreconditionError);
}

TEST(JumpCube, StandardCubePassesAndTightensWithEpsilon) {
  const JumpCubeSpec spec;
  const JumpCube a = jump_cube(spec, 0.2), b = jump_cube(spec, 0.1);
  EXPECT_TRUE(a.report.all_pass());
  EXPECT_TRUE(b.report.all_pass());
  EXPECT_EQ(a.N, choose_N(spec.b, spec.psi, 0.2));
  EXPECT_GT(b.N, a.N);
  EXPECT_LT(b.report.check("l1").measured, a.report.check("l1").measured);
  EXPECT_LT(b.report.check("slab_trace").measured, a.report.check("slab_trace").measured);
  EXPECT_NEAR(a.report.get("tv_u"), 2 * spec.r, 1e-12);
}

TEST(JumpCube, SmoothPartIsAbsorbedByTaylorTerm) {
  const FieldPtr u = std::make_shared<SumField>(ExprField::from_text({"0.3*x*y"}), standard_jump_field());
  EXPECT_TRUE(jump_cube(jump_cube_spec(u, {0.5, 0.5}, 0.05), 0.1).report.all_pass());
  // On large cubes the Taylor remainder on the slab boundaries dominates.
  EXPECT_FALSE(jump_cube(jump_cube_spec(u, {0.5, 0.5}, 0.2), 0.1).report.check("slab_trace").pass);
  EXPECT_THROW(jump_cube_spec(ExprField::from_text({"x"}), {0.5, 0.5}, 0.2), PreconditionError);
}

TEST(FullApproximation, ChecksPassAndGapsShrink) {
  const FullApproximation a = full_approximation(standard_jump_field(), 0.2);
  const FullApproximation b = full_approximation(standard_jump_field(), 0.1);
  EXPECT_TRUE(a.report.all_pass());
  EXPECT_TRUE(b.report.all_pass());
  EXPECT_LT(b.report.get("l1_gap"), a.report.get("l1_gap"));
  EXPECT_LT(b.report.get("area_gap"), a.report.get("area_gap"));
  EXPECT_LT(b.report.get("residual_measure"), a.report.get("residual_measure"));
  EXPECT_EQ(a.report.extra["cubes"].size(), 2u);
}

TEST(FullApproximation, DeepAnnuliKeepCellsDisjoint) {
  // Shared annulus nodes used to differ in the last bits, giving relative
  // overlaps above 1e-12 between the smallest cells.
  FullOptions opt;
  opt.depth = 5;
  const FullApproximation f = full_approximation(standard_jump_field(), 0.4, opt);
  EXPECT_TRUE(f.report.check("overlap").pass) << f.report.check("overlap").measured;
  EXPECT_TRUE(f.report.all_pass());
}

TEST(FullApproximation, SmoothFieldUsesBackgroundOnly) {
  const auto u = ExprField::from_text({"sin(x)*y"});
  FullOptions opt;
  const FullApproximation f = full_approximation(u, 0.1, opt);
  EXPECT_TRUE(f.report.check("strict_gap").pass);
  EXPECT_TRUE(f.report.check("trace_gap").pass);
  EXPECT_EQ(f.mesh->area(CellRole::Background), f.mesh->area());
  // A nonaffine boundary trace is matched only up to the O(k^2) interpolation error.
  opt.k_smooth /= 2;
  const double ratio =
      f.report.check("boundary_trace").measured / full_approximation(u, 0.1, opt).report.check("boundary_trace").measured;
  EXPECT_GT(ratio, 3.5);
  EXPECT_LT(ratio, 4.5);
  EXPECT_THROW(full_approximation(std::make_shared<JumpField>(Value{1.0}, unit_from_angle(0.3),
                                                              MonotoneProfile::heaviside(0.0), Point{0.5, 0.5}),
                                  0.1),
               PreconditionError);
}

TEST(NoConstant, StaircasesLoseDeterminantMass) {
  const Report r = no_constant_demo({4, 16, 64});
  EXPECT_TRUE(r.all_pass());
  EXPECT_NEAR(r.get("gap"), 1.0, 1e-10);
  EXPECT_NEAR(r.get("tv_persistent_gap"), 2 - std::sqrt(2.0), 1e-10);
}

TEST(Report, JsonRoundTripPreservesChecks) {
  Report r;
  r.kind = "demo";
  r.set("a", 1.5);
  r.set("a", 2.5);
  r.add(Check::make("tight", 1.0, 1.0, false));
  r.add(Check::make("strict", 1.0, 1.0));
  const Report s = report_from_json(to_json(r));
  EXPECT_EQ(s.kind, "demo");
  EXPECT_EQ(s.get("a"), 2.5);
  ASSERT_EQ(s.checks.size(), 2u);
  for (const auto& c : s.checks) EXPECT_EQ(c.pass, c.evaluate());
  EXPECT_TRUE(s.check("tight").pass);
  EXPECT_FALSE(s.check("strict").pass);
  EXPECT_THROW(report_from_json({{"kind", "x"}}), InputError);
}

TEST(Blowup, SmoothModeTendsToDifferential) {
  const auto u = ExprField::from_text({"3*x - y + x^2"});
  const Point x0{0.4, 0.6}, y{0.5, -0.3};
  double prev = 1e300;
  for (double r : {0.1, 0.05, 0.025}) {
    const Blowup b = blowup(u, x0, r, BlowupMode::Smooth);
    const double lin = (3 + 2 * x0.x) * y.x - y.y;
    const double err = std::abs(b.field->eval(y)[0] - lin);
    EXPECT_NEAR(err, r * y.x * y.x, 1e-12);
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(Blowup, SingularModeHasUnitVariation) {
  for (double r : {0.2, 0.1}) {
    const Blowup b = blowup(standard_jump_field(), {0.5, 0.5}, r, BlowupMode::Singular, {{0, 0}, {1, 1}}, {1, 0}, 0.3);
    EXPECT_NEAR(b.alpha * r / 2, 1.0, 1e-10);
    const Region ref{ConvexPolygon(RotatedRect({0, 0}, {1, 0}, 1, 1))};
    EXPECT_NEAR(total_variation(*b.field, ref).total, 1.0, 1e-10);
  }
  EXPECT_THROW(blowup(standard_jump_field(), {0.5, 0.5}, 0.4, BlowupMode::Smooth), PreconditionError);
  EXPECT_THROW(blowup(ExprField::from_text({"1"}), {0.5, 0.5}, 0.1, BlowupMode::Singular), PreconditionError);
}
