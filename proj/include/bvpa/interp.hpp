#pragma once

// Lagrange interpolation on simplices and meshes, and the annulus element
// construction that glues an inner piecewise affine field to the outer
// values of u.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "bvpa/error.hpp"
#include "bvpa/fields.hpp"
#include "bvpa/functionals.hpp"
#include "bvpa/geometry.hpp"
#include "bvpa/mesh.hpp"
#include "bvpa/piecewise_affine.hpp"

namespace bvpa {

namespace detail {

inline double distance_to_jumps(const std::vector<JumpSegment>& jumps, Point p) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& j : jumps) d = std::min(d, distance(closest_point_on_segment(j.seg, p), p));
  return d;
}

}  // namespace detail

/// The affine map agreeing with f at the vertices of s.
inline AffineMap lagrange_simplex(const Field& f, const Simplex& s) {
  const auto jumps = f.singular_support();
  const double tol = 1e-9 * s.diam();
  std::array<Value, 3> vals;
  for (int i = 0; i < 3; ++i) {
    if (!jumps.empty() && detail::distance_to_jumps(jumps, s[i]) <= tol)
      throw PreconditionError("vertex_off_jump", "simplex vertex lies on a jump of the field");
    vals[i] = f.eval(s[i]);
  }
  return affine_from_vertex_values(s, vals);
}

enum class MollifyMode { None, Global, PerCell };

struct InterpolationOptions {
  /// Default: per-cell radius diam(tau) when u has jumps, none otherwise.
  std::optional<MollifyMode> mode;
  double epsilon = 0.0;  ///< radius for MollifyMode::Global
  std::optional<ConvexPolygon> domain;  ///< constant extension outside, if set
};

/// Per-cell Lagrange interpolant of u (or of its mollification).
inline std::shared_ptr<PiecewiseAffineField> interpolate(const FieldPtr& u, std::shared_ptr<const Mesh> mesh,
                                                        const InterpolationOptions& opt = {}) {
  if (!mesh || mesh->empty()) throw PreconditionError("nonempty_mesh", "mesh has no cells");
  const auto jumps = u->singular_support();
  const MollifyMode mode = opt.mode.value_or(jumps.empty() ? MollifyMode::None : MollifyMode::PerCell);
  FieldPtr global;
  if (mode == MollifyMode::Global) global = mollify(u, opt.epsilon, opt.domain);
  std::vector<AffineMap> maps;
  maps.reserve(mesh->size());
  for (const auto& c : mesh->cells()) {
    const auto* s = std::get_if<Simplex>(&c.shape);
    if (!s) throw PreconditionError("simplex_cells", "interpolation needs simplex cells");
    std::array<Value, 3> vals;
    if (mode == MollifyMode::None) {
      // Vertices on a jump are moved slightly into the cell.
      const Point ctr = s->centroid();
      const double d = s->diam();
      for (int i = 0; i < 3; ++i) {
        Point p = (*s)[i];
        if (!jumps.empty() && detail::distance_to_jumps(jumps, p) <= 1e-9 * d)
          p = p + (1e-6 * d / distance(ctr, p)) * (ctr - p);
        vals[i] = u->eval(p);
      }
    } else {
      const FieldPtr f = mode == MollifyMode::Global ? global : mollify(u, s->diam(), opt.domain);
      for (int i = 0; i < 3; ++i) vals[i] = f->eval((*s)[i]);
    }
    maps.push_back(affine_from_vertex_values(*s, vals));
  }
  return std::make_shared<PiecewiseAffineField>(std::move(mesh), std::move(maps));
}

inline std::shared_ptr<PiecewiseAffineField> interpolate(const FieldPtr& u, const Mesh& mesh,
                                                        const InterpolationOptions& opt = {}) {
  return interpolate(u, std::make_shared<const Mesh>(mesh), opt);
}

/// Integral of |grad u - grad a| over the mesh of a.
inline double gradient_error(const Field& u, const PiecewiseAffineField& a, const QuadratureSpec& q = {}) {
  double total = 0.0;
  for (const auto& c : a.mesh().cells()) {
    const Jacobian& G = a.map(c.id).linear;
    total += integrate_region(Region(polygon(c.shape)), {&u}, q,
                              [&](Point p) { return (u.gradient(p) - G).frobenius(); });
  }
  return total;
}

struct StabilityRatios {
  double l1 = 0.0;    ///< int |a| / int |u|
  double grad = 0.0;  ///< int |grad a| / |Du|
};

inline StabilityRatios interpolation_stability(const Field& u, const PiecewiseAffineField& a,
                                               const QuadratureSpec& q = {}) {
  const Region r(a.mesh());
  double ga = 0.0;
  for (const auto& c : a.mesh().cells()) ga += a.map(c.id).linear.frobenius() * measure(c.shape);
  const double lu = l1_norm(u, r, q), tu = total_variation(u, r, q).total;
  return {lu > 0 ? l1_norm(a, r, q) / lu : 0.0, tu > 0 ? ga / tu : 0.0};
}

// ---------------------------------------------------------------------------

struct ElementReport {
  AnnulusInfo annulus;
  double area = 0.0;              ///< L^2(A)
  double tv_u = 0.0;              ///< |Du|(A)
  double area_u = 0.0;            ///< <Du>(A)
  double area_v = 0.0;            ///< <Dv>(A)
  double cell_trace_sum = 0.0;    ///< sum over cells of int over cell boundary |u - v|
  double inner_trace_gap = 0.0;   ///< int over boundary of Q0 of |v - w|
  double outer_trace_gap = 0.0;   ///< int over boundary of Q of |v - u|
  double area_ratio = 0.0;        ///< <Dv>(A) / (L^2 + <Du>)(A)
  double trace_ratio = 0.0;       ///< cell_trace_sum / |Du|(A), 0 if |Du|(A) = 0
};

struct ElementConstruction {
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<PiecewiseAffineField> v;
  ElementReport report;
};

/// Piecewise affine v on the annulus Q minus Q0 with v = w on the boundary of
/// Q0 and v = u on the boundary of Q. Interior vertices take the mollified
/// value of u with radius the smallest diameter of the incident cells.
inline ElementConstruction element_construction(const FieldPtr& u, const RotatedRect& Q, const RotatedRect& Q0,
                                                const Field& w, int L, const QuadratureSpec& q = {},
                                                bool with_report = true) {
  ElementConstruction out;
  AnnulusInfo info;
  auto mesh = std::make_shared<Mesh>(whitney_annulus(Q, Q0, L, &info));
  const ConvexPolygon inner(Q0), outer(Q);
  const double scale = Q.diam();
  const double tol = 1e-10 * scale;
  const auto jumps = u->singular_support();

  double smallest = std::numeric_limits<double>::infinity();
  for (const auto& c : mesh->cells()) smallest = std::min(smallest, diam(c.shape));
  const double quantum = 1e-6 * smallest;
  auto key = [&](Point p) {
    return std::pair<long long, long long>{std::llround(p.x / quantum), std::llround(p.y / quantum)};
  };
  std::map<std::pair<long long, long long>, double> min_diam;
  for (const auto& c : mesh->cells()) {
    const double d = diam(c.shape);
    for (Point p : polygon(c.shape).vertices()) {
      auto [it, fresh] = min_diam.emplace(key(p), d);
      if (!fresh) it->second = std::min(it->second, d);
    }
  }

  std::map<std::pair<long long, long long>, Value> interior_cache;
  std::vector<AffineMap> maps;
  for (const auto& c : mesh->cells()) {
    const Simplex& s = std::get<Simplex>(c.shape);
    const Point ctr = s.centroid();
    std::array<Value, 3> vals;
    for (int i = 0; i < 3; ++i) {
      const Point p = s[i];
      if (inner.contains(p, tol) && distance_to_boundary(inner, p) <= tol) {
        vals[i] = w.trace_eval(p, ctr - p);
      } else if (distance_to_boundary(outer, p) <= tol) {
        const bool on_jump = !jumps.empty() && detail::distance_to_jumps(jumps, p) <= tol;
        vals[i] = on_jump ? u->trace_eval(p, ctr - p) : u->eval(p);
      } else {
        auto k = key(p);
        auto it = interior_cache.find(k);
        if (it == interior_cache.end()) it = interior_cache.emplace(k, MollifiedField(u, min_diam.at(k)).eval(p)).first;
        vals[i] = it->second;
      }
    }
    maps.push_back(affine_from_vertex_values(s, vals));
  }
  out.mesh = mesh;
  out.v = std::make_shared<PiecewiseAffineField>(mesh, std::move(maps));
  out.report.annulus = info;
  if (!with_report) return out;

  const Region A(*mesh);
  ElementReport& r = out.report;
  r.area = A.area();
  r.tv_u = total_variation(*u, A, q).total;
  r.area_u = area_functional(*u, A, q).total;
  r.area_v = area_functional(*out.v, A, q).total;
  r.cell_trace_sum = trace_gap(*u, *out.v, *mesh, q);
  // Boundary gaps, integrated cell edge by cell edge so each piece is smooth.
  auto on_boundary = [&](const ConvexPolygon& poly, Point p) { return distance_to_boundary(poly, p) <= tol; };
  const detail::CutSet ucuts({u.get()}, q.split_jumps);
  for (const auto& c : mesh->cells()) {
    const AffineMap& a = out.v->map(c.id);
    for (const Segment& e : polygon(c.shape).edges()) {
      const Point m = e.midpoint();
      if (on_boundary(inner, e.a) && on_boundary(inner, e.b) && on_boundary(inner, m)) {
        r.inner_trace_gap += integrate_segment(
            e, q.edge_nodes, [&](Point p) { return (a(p) - w.trace_eval(p, Q0.center() - m)).norm(); });
      } else if (on_boundary(outer, e.a) && on_boundary(outer, e.b) && on_boundary(outer, m)) {
        const Vec2 in = polygon(c.shape).centroid() - m;
        const auto t = ucuts.cuts(e);
        for (std::size_t k = 0; k + 1 < t.size(); ++k)
          r.outer_trace_gap += integrate_segment({e.at(t[k]), e.at(t[k + 1])}, q.edge_nodes,
                                                 [&](Point p) { return (a(p) - u->trace_eval(p, in)).norm(); });
      }
    }
  }
  r.area_ratio = r.area_v / (r.area + r.area_u);
  r.trace_ratio = r.tv_u > 0 ? r.cell_trace_sum / r.tv_u : 0.0;
  return out;
}

}  // namespace bvpa
