#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bvpa/fields.hpp"
#include "bvpa/functionals.hpp"

using namespace bvpa;

namespace {

// Midpoint-rule oracle for int_a^b |p - q|.
double brute_l1(const MonotoneProfile& p, const MonotoneProfile& q, double a, double b, int n = 200000) {
  double s = 0.0;
  const double h = (b - a) / n;
  for (int i = 0; i < n; ++i) {
    const double t = a + (i + 0.5) * h;
    s += std::abs(p(t) - q(t));
  }
  return s * h;
}

MonotoneProfile ramp_with_jump() { return {{-0.5, 0.2, 0.6}, {0.0, 0.3, 1.2}, {0.0, 1.0, 1.5}}; }

}  // namespace

TEST(Profile, LimitsAndVariation) {
  const MonotoneProfile h = MonotoneProfile::heaviside(0.0);
  EXPECT_EQ(h(-1e-9), 0.0);
  EXPECT_EQ(h(0.0), 1.0);
  EXPECT_EQ(h.left_limit(0.0), 0.0);
  EXPECT_EQ(h.variation(-1, 1), 1.0);
  const MonotoneProfile p = ramp_with_jump();
  EXPECT_NEAR(p(-0.15), 0.15, 1e-15);
  EXPECT_NEAR(p.slope(0.0), 3.0 / 7.0, 1e-14);
  EXPECT_NEAR(p.variation(-1, 1), 1.5, 1e-15);
  EXPECT_EQ(p.jumps().size(), 2u);
  EXPECT_NEAR(p.jumps()[1].second, 0.3, 1e-15);
  EXPECT_NEAR(p.jumps()[0].second, 0.7, 1e-15);
}

TEST(Profile, RejectsNonMonotoneData) {
  EXPECT_THROW(MonotoneProfile({0, 1}, {0, 0.5}, {1, 0.7}), PreconditionError);  // slope < 0
  EXPECT_THROW(MonotoneProfile({0}, {1}, {0}), PreconditionError);               // downward jump
  EXPECT_THROW(MonotoneProfile({1, 0}, {0, 1}, {0, 1}), PreconditionError);      // unordered
}

TEST(Profile, ReparametrizedComposes) {
  const MonotoneProfile p = ramp_with_jump();
  const MonotoneProfile q = p.reparametrized(0.1, 0.5);
  for (double t : {-1.3, -0.2, 0.0, 0.35, 0.9}) EXPECT_NEAR(q(t), p(0.1 + 0.5 * t), 1e-14);
}

TEST(Profile, L1DistanceMatchesMidpointOracle) {
  const MonotoneProfile p = ramp_with_jump();
  const MonotoneProfile q = MonotoneProfile::identity(2.0);
  EXPECT_NEAR(profile_l1_distance(p, q, -1, 1), brute_l1(p, q, -1, 1), 1e-6);
  const MonotoneProfile s = staircase(p, 7, choose_shift(p, 7));
  EXPECT_NEAR(profile_l1_distance(p, s, -1, 1), brute_l1(p, s, -1, 1), 1e-6);
}

TEST(Staircase, ChooseNForHeaviside) {
  const MonotoneProfile h = MonotoneProfile::heaviside(0.0);
  EXPECT_EQ(choose_N(Value{1.0}, h, 0.1), 81);
  EXPECT_EQ(choose_N(Value{1.0}, h, 0.05), 161);
  EXPECT_EQ(choose_N(Value{1.0}, h, 1.0), 9);
  EXPECT_EQ(choose_N(Value{1.0}, MonotoneProfile::identity(), 0.1), 161);
  EXPECT_THROW(choose_N(Value{1.0}, h, 0.0), PreconditionError);
}

TEST(Staircase, ShiftAvoidsJumps) {
  const MonotoneProfile h = MonotoneProfile::heaviside(0.0);
  EXPECT_EQ(choose_shift(h, 81), 0.0);
  EXPECT_NEAR(choose_shift(h, 80), 1.0 / 80, 1e-15);
  EXPECT_FALSE(grid_hits_jump(h, 80, choose_shift(h, 80)));
  EXPECT_THROW(staircase(h, 80, 0.0), PreconditionError);
}

TEST(Staircase, GapBelowClosedFormBound) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = -1 + 2 * U(rng), b = -1 + 2 * U(rng);
    const MonotoneProfile psi({std::min(a, b) - 0.01, std::max(a, b)}, {0, 0.5}, {0.3 * U(rng), 0.5 + U(rng)});
    const Value amp{U(rng) + 0.1};
    const double eps = 0.1 + 0.3 * U(rng);
    const int N = choose_N(amp, psi, eps);
    const double theta = choose_shift(psi, N);
    const MonotoneProfile phi = staircase(psi, N, theta);
    const auto t = staircase_nodes(N, theta);
    for (double tj : t) EXPECT_NEAR(phi(tj), psi(tj), 1e-14);
    const double gap = staircase_gap(amp, psi, phi, N, theta);
    EXPECT_NEAR(gap, 2 * amp.norm() * brute_l1(psi, phi, t.front(), t.back()), 1e-5);
    EXPECT_LE(gap, staircase_gap_bound(amp, psi, N, theta));
    EXPECT_LT(staircase_gap_bound(amp, psi, N, theta), eps / 2);
    EXPECT_LE(slab_trace(amp, psi, phi, N, theta), slab_trace_bound(amp, psi, N, theta));
  }
}

TEST(JumpFieldTest, ValuesTracesAndSupport) {
  const JumpField u(Value{2.0, -1.0}, {1, 0}, MonotoneProfile::heaviside(0.0), {0.5, 0.5}, 1.0);
  EXPECT_EQ(u.eval({0.4, 0.2})[0], 0.0);
  EXPECT_EQ(u.eval({0.6, 0.2})[0], 2.0);
  EXPECT_EQ(u.trace_eval({0.5, 0.3}, {-1, 0})[0], 0.0);
  EXPECT_EQ(u.trace_eval({0.5, 0.3}, {1, 0})[1], -1.0);
  const auto s = u.singular_support();
  ASSERT_EQ(s.size(), 1u);
  EXPECT_NEAR(s[0].normal.x, 1.0, 0.0);
  EXPECT_NEAR(s[0].beta[0], 2.0, 0.0);
  const auto tv = total_variation(u, Region{ConvexPolygon::from_box({{0, 0}, {1, 1}})});
  EXPECT_NEAR(tv.singular, std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(tv.ac, 0.0, 0.0);
}

TEST(PullbackFieldTest, RotationIsComposition) {
  const FieldPtr u = ExprField::from_text({"x^2 + 3*y", "sin(x*y)"});
  const auto v = PullbackField::rotated(u, 0.8);
  const Point x{0.3, -0.4};
  const Point Rx{std::cos(0.8) * x.x - std::sin(0.8) * x.y, std::sin(0.8) * x.x + std::cos(0.8) * x.y};
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(v->eval(Rx)[i], u->eval(x)[i], 1e-14);
  // Gradient transforms by R: grad v(Rx) = R grad u(x).
  const Vec2 gu = u->gradient(x).rows[0], gv = v->gradient(Rx).rows[0];
  EXPECT_NEAR(gv.x, std::cos(0.8) * gu.x - std::sin(0.8) * gu.y, 1e-13);
  EXPECT_NEAR(gv.y, std::sin(0.8) * gu.x + std::cos(0.8) * gu.y, 1e-13);
}

TEST(Mollifier, ReproducesQuadraticsAndConstants) {
  const FieldPtr q = ExprField::from_text({"1 + 2*x - y + 0.5*x*y"});
  const MollifiedField m(q, 0.1);
  for (Point p : {Point{0.3, 0.4}, Point{-0.2, 0.9}}) {
    EXPECT_NEAR(m.eval(p)[0], q->eval(p)[0], 1e-12);
    const Jets j = m.jets(p);
    EXPECT_NEAR(j.c[0].grad.x, 2 + 0.5 * p.y, 1e-11);
    EXPECT_NEAR(j.c[0].grad.y, -1 + 0.5 * p.x, 1e-11);
    EXPECT_NEAR(j.c[0].hxy, 0.5, 1e-9);
  }
  // x^2 picks up the kernel's second moment, which is positive.
  const MollifiedField m2(ExprField::from_text({"x^2"}), 0.1);
  EXPECT_GT(m2.eval({0.0, 0.0})[0], 0.0);
  EXPECT_LT(m2.eval({0.0, 0.0})[0], 0.01);
}

TEST(Mollifier, SmoothsJumpsMonotonically) {
  const FieldPtr h = std::make_shared<JumpField>(Value{1.0}, Vec2{1, 0}, MonotoneProfile::heaviside(0.0));
  const MollifiedField m(h, 0.2);
  EXPECT_NEAR(m.eval({-0.25, 0})[0], 0.0, 1e-14);
  EXPECT_NEAR(m.eval({0.25, 0})[0], 1.0, 1e-14);
  double prev = -1;
  for (double x = -0.2; x <= 0.2; x += 0.02) {
    const double v = m.eval({x, 0.0})[0];
    EXPECT_GE(v, prev - 1e-12);
    prev = v;
  }
  EXPECT_TRUE(m.singular_support().empty());
}

TEST(RasterFieldTest, PixelsAndEdges) {
  // 2x2: bottom row 0 1, top row 2 3.
  const RasterField r(2, 2, {0, 1, 2, 3}, 0.5);
  EXPECT_EQ(r.eval({0.25, 0.25})[0], 0.0);
  EXPECT_EQ(r.eval({0.75, 0.25})[0], 1.0);
  EXPECT_EQ(r.eval({0.25, 0.75})[0], 2.0);
  EXPECT_EQ(r.eval({0.75, 0.75})[0], 3.0);
  EXPECT_EQ(r.trace_eval({0.5, 0.25}, {-1, 0})[0], 0.0);
  EXPECT_EQ(r.trace_eval({0.5, 0.25}, {1, 0})[0], 1.0);
  // Edge sum: vertical edges |1-0| + |3-2|, horizontal |2-0| + |3-1|, each of length 1/2.
  const auto tv = total_variation(r, Region{ConvexPolygon::from_box({{0, 0}, {1, 1}})});
  EXPECT_NEAR(tv.singular, 3.0, 1e-12);
  EXPECT_THROW(RasterField(2, 2, {0, 1, 2}, 1.0), PreconditionError);
}

TEST(SumFieldTest, AddsValuesAndSupports) {
  const FieldPtr a = ExprField::from_text({"x"});
  const FieldPtr b = std::make_shared<JumpField>(Value{1.0}, Vec2{0, 1}, MonotoneProfile::heaviside(0.5));
  const FieldPtr s = a + b;
  EXPECT_DOUBLE_EQ(s->eval({0.3, 0.7})[0], 1.3);
  EXPECT_EQ(s->singular_support().size(), 1u);
  EXPECT_THROW(SumField(a, ExprField::from_text({"x", "y"})), PreconditionError);
}
