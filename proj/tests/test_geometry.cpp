#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "bvpa/geometry.hpp"
#include "bvpa/quadrature.hpp"

using namespace bvpa;

namespace {

ConvexPolygon random_convex(std::mt19937_64& rng, int n = 12) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) pts.push_back({U(rng), U(rng)});
  return convex_hull(pts);
}

double perimeter_on_line(const ConvexPolygon& p, const Line& l) {
  double s = 0.0;
  for (const auto& e : p.edges())
    if (std::abs(l.side(e.a)) < 1e-12 && std::abs(l.side(e.b)) < 1e-12) s += e.length();
  return s;
}

}  // namespace

TEST(Geometry, BarycentricReproducesPoint) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const Simplex s({U(rng), U(rng)}, {U(rng), U(rng)}, {U(rng), U(rng)});
    const Point p{U(rng), U(rng)};
    const auto l = barycentric(s, p);
    EXPECT_NEAR(l[0] + l[1] + l[2], 1.0, 1e-10);
    const Point q = l[0] * s[0] + l[1] * s[1] + l[2] * s[2];
    EXPECT_NEAR(q.x, p.x, 1e-9);
    EXPECT_NEAR(q.y, p.y, 1e-9);
  }
}

TEST(Geometry, DegenerateSimplexRejected) {
  EXPECT_THROW(Simplex({0, 0}, {1, 1}, {2, 2}), DegenerateSimplexError);
  EXPECT_THROW(Simplex({0, 0}, {0, 0}, {1, 0}), DegenerateSimplexError);
}

TEST(Geometry, AffineFromVertexValuesInterpolates) {
  const Simplex s({0.1, 0.2}, {1.3, -0.4}, {0.5, 0.9});
  const std::array<Value, 3> vals{Value{1.0, -2.0}, Value{3.0, 0.5}, Value{-1.0, 4.0}};
  const AffineMap a = affine_from_vertex_values(s, vals);
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 2; ++c) EXPECT_NEAR(a(s[i])[c], vals[i][c], 1e-13);
}

TEST(Geometry, RotatedRectMatchesPolygon) {
  const RotatedRect r({0.3, -0.2}, unit_from_angle(0.9), 0.5, 0.25);
  const ConvexPolygon p(r);
  EXPECT_NEAR(p.area(), r.measure(), 1e-14);
  EXPECT_NEAR(p.perimeter(), r.perimeter(), 1e-14);
  EXPECT_NEAR(p.diam(), r.diam(), 1e-14);
  EXPECT_THROW(RotatedRect({0, 0}, {2, 0}, 1, 1), PreconditionError);
}

TEST(Geometry, ClipConservesAreaAndSharesCut) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(-0.5, 0.5), A(0.0, 6.3);
  for (int i = 0; i < 300; ++i) {
    const ConvexPolygon p = random_convex(rng);
    const Line l{{U(rng), U(rng)}, unit_from_angle(A(rng))};
    const auto [neg, pos] = clip_halfplane(p, l);
    EXPECT_NEAR(neg.area() + pos.area(), p.area(), 1e-13);
    if (!neg.empty() && !pos.empty()) {
      EXPECT_NEAR(perimeter_on_line(neg, l), perimeter_on_line(pos, l), 1e-12);
    }
  }
}

TEST(Geometry, IntersectionOfBoxesIsBox) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Box a{{U(rng), U(rng)}, {1 + U(rng), 1 + U(rng)}};
    const Box b{{U(rng), U(rng)}, {1 + U(rng), 1 + U(rng)}};
    const double w = std::min(a.hi.x, b.hi.x) - std::max(a.lo.x, b.lo.x);
    const double h = std::min(a.hi.y, b.hi.y) - std::max(a.lo.y, b.lo.y);
    EXPECT_NEAR(intersect(ConvexPolygon::from_box(a), ConvexPolygon::from_box(b)).area(), w * h, 1e-13);
  }
}

TEST(Geometry, ConvexHullContainsPointsAndIsCounterclockwise) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<Point> pts;
  for (int i = 0; i < 100; ++i) pts.push_back({U(rng), U(rng)});
  const ConvexPolygon h = convex_hull(pts);
  EXPECT_GT(h.area(), 0.0);
  for (Point p : pts) EXPECT_TRUE(h.contains(p, 1e-12));
  const ConvexPolygon sq = convex_hull({{0, 0}, {1, 0}, {0.5, 0.5}, {1, 1}, {0, 1}, {0.2, 0.7}});
  EXPECT_EQ(sq.vertices().size(), 4u);
  EXPECT_NEAR(sq.area(), 1.0, 1e-15);
}

TEST(Geometry, AreaFarFromOriginHasNoCancellation) {
  // A sliver of true area 1e-30 at coordinates ~0.5.
  const ConvexPolygon p(std::vector<Point>{{0.5, 0.9}, {0.5 + 1e-15, 0.9}, {0.5, 0.9 + 2e-15}});
  EXPECT_LT(p.area(), 1e-29);
  const ConvexPolygon q(std::vector<Point>{{1e6, 1e6}, {1e6 + 1, 1e6}, {1e6 + 1, 1e6 + 1}, {1e6, 1e6 + 1}});
  EXPECT_DOUBLE_EQ(q.area(), 1.0);
  EXPECT_NEAR(q.centroid().x, 1e6 + 0.5, 1e-9);
}

TEST(Geometry, DistanceToBoundaryAndClipSegment) {
  const ConvexPolygon sq = ConvexPolygon::from_box({{0, 0}, {1, 1}});
  EXPECT_NEAR(distance_to_boundary(sq, {0.3, 0.4}), 0.3, 1e-15);
  EXPECT_NEAR(distance(sq, {2.0, 0.5}), 1.0, 1e-15);
  const auto c = clip_segment({{-1, 0.5}, {3, 0.5}}, sq);
  ASSERT_TRUE(c.has_value());
  EXPECT_NEAR(c->first, 0.25, 1e-14);
  EXPECT_NEAR(c->second, 0.5, 1e-14);
  EXPECT_FALSE(clip_segment({{-1, 2}, {3, 2}}, sq).has_value());
}

TEST(Quadrature, GaussLegendreIsExactForPolynomials) {
  for (int n = 1; n <= 8; ++n) {
    const auto& g = gauss_legendre(n);
    for (int k = 0; k < 2 * n; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * std::pow(g.nodes[i], k);
      EXPECT_NEAR(s, k % 2 ? 0.0 : 2.0 / (k + 1), 1e-13) << n << " " << k;
    }
  }
}

TEST(Quadrature, TriangleRuleDegreeFour) {
  // Integral of x^a y^b over the unit simplex is a! b! / (a + b + 2)!.
  auto fact = [](int n) { double f = 1; for (int i = 2; i <= n; ++i) f *= i; return f; };
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; a + b <= 4; ++b) {
      const double v = integrate_triangle({0, 0}, {1, 0}, {0, 1}, 0,
                                          [&](Point p) { return std::pow(p.x, a) * std::pow(p.y, b); });
      EXPECT_NEAR(v, fact(a) * fact(b) / fact(a + b + 2), 1e-15);
    }
}

TEST(Quadrature, HaltonIsInUnitSquareAndDistinct) {
  std::set<std::pair<double, double>> seen;
  for (std::uint64_t i = 1; i <= 1000; ++i) {
    const Vec2 h = halton2(i);
    EXPECT_GE(h.x, 0.0);
    EXPECT_LT(h.x, 1.0);
    EXPECT_GE(h.y, 0.0);
    EXPECT_LT(h.y, 1.0);
    EXPECT_TRUE(seen.insert({h.x, h.y}).second);
  }
  EXPECT_DOUBLE_EQ(radical_inverse(1, 2), 0.5);
  EXPECT_DOUBLE_EQ(radical_inverse(5, 3), 7.0 / 9.0);
}
