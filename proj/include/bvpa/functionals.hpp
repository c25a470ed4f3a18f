#pragma once

// Integral functionals of fields: L1 norms and distances, total variation,
// the area functional, trace gaps on cell boundaries, the L1 modulus of the
// gradient, the vertex-weighted Hessian integral, and masses F(Du).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "bvpa/error.hpp"
#include "bvpa/fields.hpp"
#include "bvpa/geometry.hpp"
#include "bvpa/mesh.hpp"
#include "bvpa/piecewise_affine.hpp"
#include "bvpa/quadrature.hpp"

namespace bvpa {

struct MeasureValue {
  double ac = 0.0;
  double singular = 0.0;
  double total = 0.0;
};

/// A finite union of convex polygons with disjoint interiors.
struct Region {
  std::vector<ConvexPolygon> polys;

  Region() = default;
  explicit Region(ConvexPolygon p) { polys.push_back(std::move(p)); }
  explicit Region(const Box& b) { polys.push_back(ConvexPolygon::from_box(b)); }
  explicit Region(const Mesh& m) {
    for (const auto& c : m.cells()) polys.push_back(polygon(c.shape));
  }
  double area() const {
    double a = 0.0;
    for (const auto& p : polys) a += p.area();
    return a;
  }
  bool contains(Point x, double tol = 0.0) const {
    return std::any_of(polys.begin(), polys.end(), [&](const ConvexPolygon& p) { return p.contains(x, tol); });
  }
  Box bbox() const {
    Box b = polys.front().bbox();
    for (const auto& p : polys) {
      b.expand(p.bbox().lo);
      b.expand(p.bbox().hi);
    }
    return b;
  }
};

inline Region unit_square() { return Region(Box{{0, 0}, {1, 1}}); }

// ---------------------------------------------------------------------------

/// Integrates g over the region, splitting each polygon into the smooth
/// pieces of every listed field first.
template <class G>
double integrate_region(const Region& region, std::initializer_list<const Field*> fields, const QuadratureSpec& q,
                        G&& g) {
  double total = 0.0;
  for (const auto& poly : region.polys) {
    std::vector<ConvexPolygon> pieces{poly};
    if (q.split_jumps) {
      for (const Field* f : fields) {
        std::vector<ConvexPolygon> next;
        for (const auto& p : pieces)
          for (auto& s : f->smooth_pieces(p)) next.push_back(std::move(s));
        pieces = std::move(next);
      }
    }
    for (const auto& p : pieces) total += integrate_polygon(p, q.levels, g);
  }
  return total;
}

inline double l1_norm(const Field& u, const Region& region, const QuadratureSpec& q = {}) {
  return integrate_region(region, {&u}, q, [&](Point p) { return u.eval(p).norm(); });
}

inline double l1_distance(const Field& u, const Field& v, const Region& region, const QuadratureSpec& q = {}) {
  if (u.components() != v.components()) throw PreconditionError("components", "fields differ in dimension");
  return integrate_region(region, {&u, &v}, q, [&](Point p) { return (u.eval(p) - v.eval(p)).norm(); });
}

namespace detail {

/// Portions of a segment inside the region, as parameter intervals merged
/// across polygons.
inline std::vector<std::pair<double, double>> clip_to_region(const Segment& s, const Region& region) {
  std::vector<std::pair<double, double>> iv;
  for (const auto& p : region.polys)
    if (auto r = clip_segment(s, p); r && r->second > r->first) iv.push_back(*r);
  std::sort(iv.begin(), iv.end());
  std::vector<std::pair<double, double>> merged;
  for (auto [a, b] : iv) {
    if (!merged.empty() && a <= merged.back().second + 1e-12) merged.back().second = std::max(merged.back().second, b);
    else merged.emplace_back(a, b);
  }
  return merged;
}

/// Integral over the in-region parts of u's jump segments of F(jump, normal).
template <class F>
double singular_integral(const Field& u, const Region& region, const QuadratureSpec& q, F&& f) {
  double total = 0.0;
  const double scale = region.bbox().diagonal();
  for (const JumpSegment& j : u.singular_support()) {
    for (auto [t0, t1] : clip_to_region(j.seg, region)) {
      const Segment piece{j.seg.at(t0), j.seg.at(t1)};
      const double len = piece.length();
      if (len <= 1e-14 * scale) continue;
      const Point mid = piece.midpoint();
      const double nudge = 1e-9 * scale;
      const bool plus = region.contains(mid + nudge * j.normal);
      const bool minus = region.contains(mid - nudge * j.normal);
      if (plus != minus)
        throw PreconditionError("jump_off_region_boundary", "a jump segment runs along the region boundary");
      if (!plus) continue;
      if (j.beta.size() > 0) {
        total += len * f(j.beta, j.normal);
      } else {
        total += integrate_segment(piece, q.edge_nodes, [&](Point p) {
          return f(u.trace_eval(p, j.normal) - u.trace_eval(p, -j.normal), j.normal);
        });
      }
    }
  }
  return total;
}

}  // namespace detail

inline MeasureValue total_variation(const Field& u, const Region& region, const QuadratureSpec& q = {}) {
  MeasureValue m;
  m.ac = integrate_region(region, {&u}, q, [&](Point p) { return u.gradient(p).frobenius(); });
  m.singular = detail::singular_integral(u, region, q, [](const Value& b, Vec2) { return b.norm(); });
  m.total = m.ac + m.singular;
  return m;
}

inline MeasureValue area_functional(const Field& u, const Region& region, const QuadratureSpec& q = {}) {
  MeasureValue m;
  m.ac = integrate_region(region, {&u}, q, [&](Point p) {
    const double g = u.gradient(p).frobenius();
    return std::sqrt(1.0 + g * g);
  });
  m.singular = detail::singular_integral(u, region, q, [](const Value& b, Vec2) { return b.norm(); });
  m.total = m.ac + m.singular;
  return m;
}

struct StrictGaps {
  double l1_gap = 0.0;
  double tv_gap = 0.0;
  double area_gap = 0.0;
};

inline StrictGaps strict_gaps(const Field& u, const Field& v, const Region& region, const QuadratureSpec& q = {}) {
  StrictGaps g;
  g.l1_gap = l1_distance(u, v, region, q);
  g.tv_gap = std::abs(total_variation(u, region, q).total - total_variation(v, region, q).total);
  g.area_gap = std::abs(area_functional(u, region, q).total - area_functional(v, region, q).total);
  return g;
}

// ---------------------------------------------------------------------------

namespace detail {

/// Lines and segments across which a field may fail to be smooth.
struct CutSet {
  std::vector<Line> lines;
  std::vector<Segment> segs;

  CutSet() = default;
  CutSet(std::initializer_list<const Field*> fields, bool split) {
    if (!split) return;
    for (const Field* f : fields) {
      if (!f) continue;
      for (const Line& l : f->structure_lines()) lines.push_back(l);
      for (const JumpSegment& j : f->singular_support()) segs.push_back(j.seg);
    }
  }

  /// Sorted parameters in [0,1] splitting e at every crossing.
  std::vector<double> cuts(const Segment& e) const {
    std::vector<double> c{0.0, 1.0};
    const Vec2 d = e.b - e.a;
    for (const Line& l : lines) {
      const double sa = l.side(e.a), sb = l.side(e.b);
      if ((sa < 0 && sb > 0) || (sa > 0 && sb < 0)) c.push_back(sa / (sa - sb));
    }
    for (const Segment& g : segs) {
      const Vec2 r = g.b - g.a;
      const double den = cross(d, r);
      if (den == 0.0) continue;
      const double t = cross(g.a - e.a, r) / den;
      const double s = cross(g.a - e.a, d) / den;
      if (t > 0 && t < 1 && s >= 0 && s <= 1) c.push_back(t);
    }
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    return c;
  }
};

}  // namespace detail

/// Sum over cells R of the integral over the boundary of R of |u - v|, both
/// traces taken from inside R.
inline double trace_gap(const Field& u, const Field& v, const Mesh& mesh, const QuadratureSpec& q = {}) {
  const auto* pu = dynamic_cast<const PiecewiseAffineField*>(&u);
  const auto* pv = dynamic_cast<const PiecewiseAffineField*>(&v);
  const bool u_own = pu && &pu->mesh() == &mesh;
  const bool v_own = pv && &pv->mesh() == &mesh;
  const detail::CutSet cutset({u_own ? nullptr : &u, v_own ? nullptr : &v}, q.split_jumps);
  double total = 0.0;
  for (const auto& c : mesh.cells()) {
    const ConvexPolygon poly = polygon(c.shape);
    for (const Segment& e : poly.edges()) {
      const Vec2 d = e.b - e.a;
      const Vec2 inward = perp(d) / norm(d);  // counterclockwise polygon
      const auto cuts = cutset.cuts(e);
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const Segment piece{e.at(cuts[k]), e.at(cuts[k + 1])};
        total += integrate_segment(piece, q.edge_nodes, [&](Point p) {
          const Value a = u_own ? pu->map(c.id)(p) : u.trace_eval(p, inward);
          const Value b = v_own ? pv->map(c.id)(p) : v.trace_eval(p, inward);
          return (a - b).norm();
        });
      }
    }
  }
  return total;
}

/// Integral over the boundary of a polygon of |u - v|, traces from inside.
inline double boundary_gap(const Field& u, const Field& v, const ConvexPolygon& poly, const QuadratureSpec& q = {}) {
  const detail::CutSet cutset({&u, &v}, q.split_jumps);
  double total = 0.0;
  for (const Segment& e : poly.edges()) {
    const Vec2 d = e.b - e.a;
    const Vec2 inward = perp(d) / norm(d);
    const auto cuts = cutset.cuts(e);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
      total += integrate_segment({e.at(cuts[k]), e.at(cuts[k + 1])}, q.edge_nodes,
                                 [&](Point p) { return (u.trace_eval(p, inward) - v.trace_eval(p, inward)).norm(); });
  }
  return total;
}

// ---------------------------------------------------------------------------

inline constexpr int kModulusDirections = 32;

/// sup over 32 directions and |w| in {h, h/2} of the integral over
/// {x in D : x + w in D} of |grad u(x + w) - grad u(x)|.
inline double modulus_grad(const Field& u, double h, const Box& D, const QuadratureSpec& q = {}) {
  if (!(h > 0.0)) throw PreconditionError("positive_h", "h must be > 0");
  double best = 0.0;
  for (double len : {h, 0.5 * h}) {
    for (int k = 0; k < kModulusDirections; ++k) {
      const double th = 2.0 * std::numbers::pi * k / kModulusDirections;
      Vec2 w = len * unit_from_angle(th);
      if (std::abs(w.x) < 1e-15 * len) w.x = 0.0;
      if (std::abs(w.y) < 1e-15 * len) w.y = 0.0;
      const Box inner{{std::max(D.lo.x, D.lo.x - w.x), std::max(D.lo.y, D.lo.y - w.y)},
                      {std::min(D.hi.x, D.hi.x - w.x), std::min(D.hi.y, D.hi.y - w.y)}};
      if (!(inner.width() > 0 && inner.height() > 0)) continue;
      const PullbackField shifted(std::shared_ptr<const Field>(&u, [](const Field*) {}), {}, w, Value(), 1.0);
      const double v = integrate_region(Region(inner), {&u, &shifted}, q,
                                        [&](Point p) { return (u.gradient(p + w) - u.gradient(p)).frobenius(); });
      best = std::max(best, v);
    }
  }
  return best;
}

namespace detail {

template <class G>
double vertex_refined(Point a, Point b, Point c, std::array<bool, 3> sing, int depth, G& g) {
  if (depth == 0 || !(sing[0] || sing[1] || sing[2])) return integrate_triangle(a, b, c, 1, g);
  const Point ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
  double s = integrate_triangle(ab, bc, ca, 1, g);
  s += vertex_refined(a, ab, ca, {sing[0], false, false}, depth - 1, g);
  s += vertex_refined(ab, b, bc, {false, sing[1], false}, depth - 1, g);
  s += vertex_refined(ca, bc, c, {false, false, sing[2]}, depth - 1, g);
  return s;
}

}  // namespace detail

inline constexpr int kHessianVertexLevels = 6;

/// sum_j of the integral over s of |Hess f(x)| / |x - v_j|, with extra
/// refinement of the subcells touching the vertices.
inline double hessian_weighted(const Field& f, const Simplex& s, int levels = kHessianVertexLevels) {
  auto g = [&](Point x) {
    double w = 0.0;
    for (Point v : s.vertices()) w += 1.0 / distance(x, v);
    return f.jets(x).hessian_norm() * w;
  };
  return detail::vertex_refined(s[0], s[1], s[2], {true, true, true}, levels, g);
}

// ---------------------------------------------------------------------------

/// A positively 1-homogeneous integrand on m x 2 matrices.
struct Integrand {
  std::string name;
  std::function<double(const Jacobian&)> F;
};

inline Integrand det_sqrt_integrand() {
  return {"det_sqrt", [](const Jacobian& A) {
            if (A.m != 2) throw PreconditionError("square_gradient", "det_sqrt needs m = 2");
            return std::sqrt(std::abs(cross(A.rows[0], A.rows[1])));
          }};
}
inline Integrand norm_integrand() { return {"norm", [](const Jacobian& A) { return A.frobenius(); }}; }

/// Rejects integrands that fail F(tA) = t F(A) on random samples.
inline void check_homogeneous(const Integrand& F, int m, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N01;
  for (int trial = 0; trial < 16; ++trial) {
    Jacobian A(m);
    for (int i = 0; i < m; ++i) A.rows[i] = {N01(rng), N01(rng)};
    for (double t : {0.5, 2.0, 3.75}) {
      Jacobian tA = A;
      for (int i = 0; i < m; ++i) tA.rows[i] = t * A.rows[i];
      const double lhs = F.F(tA), rhs = t * F.F(A);
      if (!(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(rhs))))
        throw PreconditionError("one_homogeneous", "integrand '" + F.name + "' is not positively 1-homogeneous");
    }
  }
}

/// ac = int F(grad u); singular = sum over jumps of F(beta (x) n) length.
inline MeasureValue f_mass(const Field& u, const Region& region, const Integrand& F, const QuadratureSpec& q = {}) {
  check_homogeneous(F, u.components());
  MeasureValue m;
  m.ac = integrate_region(region, {&u}, q, [&](Point p) { return F.F(u.gradient(p)); });
  m.singular = detail::singular_integral(u, region, q, [&](const Value& b, Vec2 n) {
    Jacobian J(b.size());
    for (int i = 0; i < b.size(); ++i) J.rows[i] = b[i] * n;
    return F.F(J);
  });
  m.total = m.ac + m.singular;
  return m;
}

}  // namespace bvpa
