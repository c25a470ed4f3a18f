#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "bvpa/fields.hpp"
#include "bvpa/mesh.hpp"

namespace bvpa {

/// A field that is affine on each cell of a mesh. Outside the mesh the
/// nearest cell's map is used.
class PiecewiseAffineField final : public Field {
 public:
  PiecewiseAffineField(std::shared_ptr<const Mesh> mesh, std::vector<AffineMap> maps)
      : mesh_(std::move(mesh)), maps_(std::move(maps)) {
    if (!mesh_ || mesh_->empty()) throw PreconditionError("nonempty_mesh", "mesh has no cells");
    if (maps_.size() != std::size_t(mesh_->size()))
      throw PreconditionError("one_map_per_cell", "need exactly one affine map per cell");
    m_ = maps_.front().components();
    for (const auto& a : maps_)
      if (a.components() != m_) throw PreconditionError("components", "maps disagree on dimension");
  }

  const Mesh& mesh() const noexcept { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const noexcept { return mesh_; }
  const std::vector<AffineMap>& maps() const noexcept { return maps_; }
  const AffineMap& map(int cell) const { return maps_.at(cell); }

  int components() const override { return m_; }

  int cell_at(Point p) const {
    if (auto c = mesh_->locate(p)) return *c;
    return nearest_cell(p);
  }
  Value eval(Point p) const override { return maps_[cell_at(p)](p); }
  bool has_jets() const override { return true; }
  Jets jets(Point p) const override {
    const AffineMap& a = maps_[cell_at(p)];
    Jets j;
    j.m = m_;
    const Value v = a(p);
    for (int i = 0; i < m_; ++i) j.c[i] = Jet2{v[i], a.linear.rows[i], 0, 0, 0};
    return j;
  }
  /// The side is chosen by locating a point displaced along `inward`; the
  /// value is the exact evaluation of that cell's map at p.
  Value trace_eval(Point p, Vec2 inward) const override {
    const double s = 1e-9 * mesh_->scale();
    const double n = norm(inward);
    if (n == 0.0) return eval(p);
    return maps_[cell_at(p + (s / n) * inward)](p);
  }

  std::vector<JumpSegment> singular_support() const override {
    std::call_once(support_once_, [this] { support_ = compute_support(); });
    return support_;
  }
  std::vector<ConvexPolygon> smooth_pieces(const ConvexPolygon& poly) const override {
    std::vector<ConvexPolygon> out;
    for (int id : mesh_->overlapping(poly.bbox())) {
      ConvexPolygon x = intersect(poly, polygon((*mesh_)[id].shape));
      if (!x.empty()) out.push_back(std::move(x));
    }
    return out;
  }

 private:
  int nearest_cell(Point p) const {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (const auto& c : mesh_->cells()) {
      if (bd == 0.0) break;
      const double d = distance(polygon(c.shape), p);
      if (d < bd) {
        bd = d;
        best = c.id;
      }
    }
    return best;
  }

  // Each cell edge is split at the vertices of other cells lying on it; for
  // every sub-segment the two adjacent cells' maps are compared.
  std::vector<JumpSegment> compute_support() const {
    std::vector<JumpSegment> out;
    const Mesh& m = *mesh_;
    const double tol = 1e-10 * m.scale();
    for (const auto& c : m.cells()) {
      const ConvexPolygon cp = polygon(c.shape);
      for (const Segment& e : cp.edges()) {
        const Vec2 d = e.b - e.a;
        const double len = norm(d);
        if (len == 0.0) continue;
        const Vec2 out_n = Vec2{d.y, -d.x} / len;  // outward for counterclockwise polygons
        std::vector<double> cuts{0.0, 1.0};
        Box eb{e.a, e.a};
        eb.expand(e.b);
        eb.inflate(tol);
        for (int other : m.candidates(e.midpoint(), 0.5 * len + tol)) {
          for (Point v : polygon(m[other].shape).vertices()) {
            if (!eb.contains(v)) continue;
            const double t = dot(v - e.a, d) / (len * len);
            if (t <= 0.0 || t >= 1.0) continue;
            if (std::abs(cross(d, v - e.a)) / len > tol) continue;
            cuts.push_back(t);
          }
        }
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
          if ((cuts[k + 1] - cuts[k]) * len <= tol) continue;
          const Segment piece{e.at(cuts[k]), e.at(cuts[k + 1])};
          const Point mid = piece.midpoint();
          const auto nb = m.locate(mid + (1e-9 * m.scale()) * out_n);
          // Interior edges are recorded once, from the lower-id side; the
          // normal points into the higher-id neighbour.
          if (!nb || *nb == c.id) continue;
          if (*nb < c.id) continue;
          const Value ua = maps_[c.id](piece.a), ub = maps_[c.id](piece.b);
          const Value va = maps_[*nb](piece.a), vb = maps_[*nb](piece.b);
          const Value ja = va - ua, jb = vb - ub;
          if (ja.max_abs() <= 1e-13 * (1.0 + ua.max_abs()) && jb.max_abs() <= 1e-13 * (1.0 + ub.max_abs())) continue;
          const bool constant = (ja - jb).max_abs() <= 1e-13 * (1.0 + ja.max_abs());
          out.push_back({piece, out_n, constant ? ja : Value()});
        }
      }
    }
    return out;
  }

  std::shared_ptr<const Mesh> mesh_;
  std::vector<AffineMap> maps_;
  int m_ = 1;
  mutable std::once_flag support_once_;
  mutable std::vector<JumpSegment> support_;
};

/// A single affine map as a field.
class AffineField final : public Field {
 public:
  explicit AffineField(AffineMap a) : a_(std::move(a)) {}
  const AffineMap& map() const noexcept { return a_; }
  int components() const override { return a_.components(); }
  Value eval(Point p) const override { return a_(p); }
  bool has_jets() const override { return true; }
  Jets jets(Point p) const override {
    Jets j;
    j.m = components();
    const Value v = a_(p);
    for (int i = 0; i < j.m; ++i) j.c[i] = Jet2{v[i], a_.linear.rows[i], 0, 0, 0};
    return j;
  }

 private:
  AffineMap a_;
};

}  // namespace bvpa
