#pragma once

// Quadrature kernels: Gauss-Legendre lines, the symmetric 6-point degree-4
// triangle rule with uniform refinement, polygon fans, Halton points.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include "bvpa/geometry.hpp"

namespace bvpa {

struct QuadratureSpec {
  int levels = 2;       ///< uniform 4-way refinements of each triangle
  int edge_nodes = 6;   ///< Gauss-Legendre nodes per edge piece
  bool split_jumps = true;
};

struct GaussRule {
  std::vector<double> nodes;    ///< on [-1, 1]
  std::vector<double> weights;  ///< sum to 2
};

namespace detail {

inline GaussRule compute_gauss_legendre(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    r.nodes[i] = x;
    r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

}  // namespace detail

/// Gauss-Legendre rule with n nodes on [-1, 1]; cached per n.
inline const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, detail::compute_gauss_legendre(n)).first;
  return it->second;
}

/// Symmetric 6-point rule exact for degree-4 polynomials on a triangle,
/// barycentric points with weights summing to one.
struct TriangleRulePoint {
  double l0, l1, l2, w;
};
inline constexpr std::array<TriangleRulePoint, 6> kTriangleRule4{{
    {0.108103018168070228, 0.445948490915964886, 0.445948490915964886, 0.223381589678011466},
    {0.445948490915964886, 0.108103018168070228, 0.445948490915964886, 0.223381589678011466},
    {0.445948490915964886, 0.445948490915964886, 0.108103018168070228, 0.223381589678011466},
    {0.816847572980458514, 0.091576213509770743, 0.091576213509770743, 0.109951743655321868},
    {0.091576213509770743, 0.816847572980458514, 0.091576213509770743, 0.109951743655321868},
    {0.091576213509770743, 0.091576213509770743, 0.816847572980458514, 0.109951743655321868},
}};

/// Integrates f over triangle (a,b,c) with `levels` uniform 4-way refinements.
/// T must support T += double * T.
template <class T, class F>
T integrate_triangle(Point a, Point b, Point c, int levels, F&& f, T acc) {
  const int n = 1 << std::max(levels, 0);
  const Vec2 e1 = (b - a) / n, e2 = (c - a) / n;
  const double sub_area = std::abs(cross(b - a, c - a)) * 0.5 / (double(n) * n);
  auto apply = [&](Point p0, Point p1, Point p2) {
    for (const auto& q : kTriangleRule4) {
      const Point x = q.l0 * p0 + q.l1 * p1 + q.l2 * p2;
      acc += (q.w * sub_area) * f(x);
    }
  };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i + j < n; ++i) {
      const Point p = a + double(i) * e1 + double(j) * e2;
      apply(p, p + e1, p + e2);
      if (i + j < n - 1) apply(p + e1, p + e1 + e2, p + e2);
    }
  }
  return acc;
}

template <class F>
double integrate_triangle(Point a, Point b, Point c, int levels, F&& f) {
  return integrate_triangle<double>(a, b, c, levels, std::forward<F>(f), 0.0);
}

/// Fan triangulation from the first vertex.
template <class T, class F>
T integrate_polygon(const ConvexPolygon& poly, int levels, F&& f, T acc) {
  const auto& v = poly.vertices();
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (std::abs(cross(v[i] - v[0], v[i + 1] - v[0])) == 0.0) continue;
    acc = integrate_triangle<T>(v[0], v[i], v[i + 1], levels, f, acc);
  }
  return acc;
}

template <class F>
double integrate_polygon(const ConvexPolygon& poly, int levels, F&& f) {
  return integrate_polygon<double>(poly, levels, std::forward<F>(f), 0.0);
}

/// Gauss-Legendre integral of f along a segment (arc-length measure).
template <class F>
double integrate_segment(const Segment& s, int nodes, F&& f) {
  const auto& g = gauss_legendre(nodes);
  const double half = 0.5 * s.length();
  double acc = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    acc += g.weights[i] * half * f(s.at(0.5 * (g.nodes[i] + 1.0)));
  return acc;
}

/// Radical inverse Halton point, index >= 1.
inline double radical_inverse(std::uint64_t i, unsigned base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

inline Vec2 halton2(std::uint64_t i) { return {radical_inverse(i, 2), radical_inverse(i, 3)}; }

}  // namespace bvpa
