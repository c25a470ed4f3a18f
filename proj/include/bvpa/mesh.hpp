#pragma once

// Meshes: uniform triangulations, the dyadic annulus between two concentric
// rectangles, rotated slab decompositions, and mesh diagnostics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bvpa/error.hpp"
#include "bvpa/geometry.hpp"
#include "bvpa/quadrature.hpp"

namespace bvpa {

enum class CellRole { Regular, Residual, Slab, Background };

inline std::string_view role_name(CellRole r) {
  switch (r) {
    case CellRole::Regular: return "regular";
    case CellRole::Residual: return "residual";
    case CellRole::Slab: return "slab";
    case CellRole::Background: return "background";
  }
  return "regular";
}

inline CellRole role_from_name(std::string_view s) {
  if (s == "regular") return CellRole::Regular;
  if (s == "residual") return CellRole::Residual;
  if (s == "slab") return CellRole::Slab;
  if (s == "background") return CellRole::Background;
  throw InputError("unknown cell role '" + std::string(s) + "'");
}

struct MeshCell {
  int id = 0;
  Cell shape;
  CellRole role = CellRole::Regular;
};

/// tau = a + M tau0.
struct Placement {
  Vec2 a;
  double m11, m12, m21, m22;
  double det() const noexcept { return m11 * m22 - m12 * m21; }
};

inline Placement placement(const Simplex& tau0, const Simplex& tau) {
  const Vec2 e1 = tau0[1] - tau0[0], e2 = tau0[2] - tau0[0];
  const Vec2 f1 = tau[1] - tau[0], f2 = tau[2] - tau[0];
  const double d = cross(e1, e2);
  // M [e1 e2] = [f1 f2]  =>  M = [f1 f2] [e1 e2]^{-1}
  const double i11 = e2.y / d, i12 = -e2.x / d, i21 = -e1.y / d, i22 = e1.x / d;
  Placement p{};
  p.m11 = f1.x * i11 + f2.x * i21;
  p.m12 = f1.x * i12 + f2.x * i22;
  p.m21 = f1.y * i11 + f2.y * i21;
  p.m22 = f1.y * i12 + f2.y * i22;
  p.a = tau[0] - Vec2{p.m11 * tau0[0].x + p.m12 * tau0[0].y, p.m21 * tau0[0].x + p.m22 * tau0[0].y};
  return p;
}

class Mesh {
 public:
  Mesh() = default;
  Mesh(const Mesh& o) : cells_(o.cells_), tau0_(o.tau0_) {}
  Mesh& operator=(const Mesh& o) {
    if (this != &o) {
      cells_ = o.cells_;
      tau0_ = o.tau0_;
      index_.reset();
    }
    return *this;
  }
  Mesh(Mesh&& o) noexcept : cells_(std::move(o.cells_)), tau0_(std::move(o.tau0_)) {}
  Mesh& operator=(Mesh&& o) noexcept {
    cells_ = std::move(o.cells_);
    tau0_ = std::move(o.tau0_);
    index_.reset();
    return *this;
  }

  int add(Cell shape, CellRole role = CellRole::Regular) {
    const int id = static_cast<int>(cells_.size());
    cells_.push_back({id, std::move(shape), role});
    index_.reset();
    return id;
  }
  void append(const Mesh& other) {
    for (const auto& c : other.cells_) add(c.shape, c.role);
  }

  const std::vector<MeshCell>& cells() const noexcept { return cells_; }
  const MeshCell& operator[](int i) const { return cells_.at(i); }
  int size() const noexcept { return static_cast<int>(cells_.size()); }
  bool empty() const noexcept { return cells_.empty(); }

  void set_tau0(const Simplex& s) { tau0_ = s; }
  /// The reference simplex: explicit if set, else the first simplex cell.
  std::optional<Simplex> tau0() const {
    if (tau0_) return tau0_;
    for (const auto& c : cells_)
      if (auto* s = std::get_if<Simplex>(&c.shape)) return *s;
    return std::nullopt;
  }
  std::optional<Placement> placement_of(int i) const {
    const auto* s = std::get_if<Simplex>(&cells_.at(i).shape);
    auto t0 = tau0();
    if (!s || !t0) return std::nullopt;
    return placement(*t0, *s);
  }

  Box bbox() const {
    Box b{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
          {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
    for (const auto& c : cells_)
      for (Point p : polygon(c.shape).vertices()) b.expand(p);
    return b;
  }
  double area(std::optional<CellRole> role = std::nullopt) const {
    double a = 0.0;
    for (const auto& c : cells_)
      if (!role || c.role == *role) a += measure(c.shape);
    return a;
  }

  /// Ids of cells whose bounding box contains p (inflated by tol), ascending.
  std::vector<int> candidates(Point p, double tol = 0.0) const {
    const Index& ix = index();
    std::vector<int> out;
    if (ix.nx == 0) return out;
    const int i = std::clamp(static_cast<int>((p.x - ix.box.lo.x) / ix.hx), 0, ix.nx - 1);
    const int j = std::clamp(static_cast<int>((p.y - ix.box.lo.y) / ix.hy), 0, ix.ny - 1);
    for (int id : ix.buckets[std::size_t(j) * ix.nx + i]) {
      Box b = ix.boxes[id];
      b.inflate(tol);
      if (b.contains(p)) out.push_back(id);
    }
    return out;
  }

  /// Ids of cells whose bounding box meets b, ascending.
  std::vector<int> overlapping(const Box& b) const {
    const Index& ix = index();
    std::vector<int> out;
    if (ix.nx == 0) return out;
    const int i0 = std::clamp(static_cast<int>((b.lo.x - ix.box.lo.x) / ix.hx), 0, ix.nx - 1);
    const int i1 = std::clamp(static_cast<int>((b.hi.x - ix.box.lo.x) / ix.hx), 0, ix.nx - 1);
    const int j0 = std::clamp(static_cast<int>((b.lo.y - ix.box.lo.y) / ix.hy), 0, ix.ny - 1);
    const int j1 = std::clamp(static_cast<int>((b.hi.y - ix.box.lo.y) / ix.hy), 0, ix.ny - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i)
        for (int id : ix.buckets[std::size_t(j) * ix.nx + i])
          if (ix.boxes[id].overlaps(b)) out.push_back(id);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Lowest-id cell containing p (closed, with tolerance), if any.
  std::optional<int> locate(Point p, double tol = 1e-12) const {
    const double t = tol * std::max(1.0, index().scale);
    for (int id : candidates(p, t))
      if (polygon(cells_[id].shape).contains(p, t)) return id;
    return std::nullopt;
  }

  /// Characteristic length of the mesh bounding box.
  double scale() const { return index().scale; }

 private:
  struct Index {
    Box box{};
    int nx = 0, ny = 0;
    double hx = 1, hy = 1, scale = 1;
    std::vector<Box> boxes;
    std::vector<std::vector<int>> buckets;
  };

  const Index& index() const {
    std::lock_guard lock(index_mu_);
    if (!index_) index_ = build_index();
    return *index_;
  }

  std::shared_ptr<Index> build_index() const {
    auto ix = std::make_shared<Index>();
    if (cells_.empty()) return ix;
    ix->box = bbox();
    ix->scale = std::max(ix->box.width(), ix->box.height());
    const int n = std::clamp(static_cast<int>(std::sqrt(double(cells_.size()))), 1, 1024);
    ix->nx = ix->ny = n;
    ix->hx = std::max(ix->box.width(), 1e-300) / n;
    ix->hy = std::max(ix->box.height(), 1e-300) / n;
    ix->buckets.resize(std::size_t(n) * n);
    for (const auto& c : cells_) {
      Box b = polygon(c.shape).bbox();
      ix->boxes.push_back(b);
      b.inflate(1e-9 * ix->scale);
      const int i0 = std::clamp(static_cast<int>((b.lo.x - ix->box.lo.x) / ix->hx), 0, n - 1);
      const int i1 = std::clamp(static_cast<int>((b.hi.x - ix->box.lo.x) / ix->hx), 0, n - 1);
      const int j0 = std::clamp(static_cast<int>((b.lo.y - ix->box.lo.y) / ix->hy), 0, n - 1);
      const int j1 = std::clamp(static_cast<int>((b.hi.y - ix->box.lo.y) / ix->hy), 0, n - 1);
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) ix->buckets[std::size_t(j) * n + i].push_back(c.id);
    }
    return ix;
  }

  std::vector<MeshCell> cells_;
  std::optional<Simplex> tau0_;
  mutable std::mutex index_mu_;
  mutable std::shared_ptr<Index> index_;
};

// ---------------------------------------------------------------------------

struct MeshStats {
  double alpha = 1.0;
  double gamma = 1.0;
  double k = 0.0;  ///< max diameter
  double min_diam = 0.0;
  int K = 1;
  int cells = 0;
};

/// alpha = max_j max(|det M_j|, 1/|det M_j|) over simplex cells.
inline double regularity_alpha(const Mesh& mesh) {
  double a = 1.0;
  for (int i = 0; i < mesh.size(); ++i)
    if (auto p = mesh.placement_of(i)) {
      const double d = std::abs(p->det());
      a = std::max({a, d, 1.0 / d});
    }
  return a;
}

/// Max over sample points of the number of sets tau + B(0, diam tau) containing
/// the point. Samples are Halton points over the mesh bounding box with a
/// seeded random rotation.
inline int overlap_constant(const Mesh& mesh, int samples = 100000, std::uint64_t seed = 0) {
  if (mesh.empty()) throw PreconditionError("nonempty_mesh", "mesh has no cells");
  const Box box = mesh.bbox();
  struct Inflated {
    ConvexPolygon poly;
    double r;
    Box box;
  };
  std::vector<Inflated> inf;
  Box all = box;
  for (const auto& c : mesh.cells()) {
    Inflated x{polygon(c.shape), diam(c.shape), {}};
    x.box = x.poly.bbox();
    x.box.inflate(x.r);
    all.expand(x.box.lo);
    all.expand(x.box.hi);
    inf.push_back(std::move(x));
  }
  const int n = std::clamp(static_cast<int>(std::sqrt(double(inf.size()))), 1, 512);
  const double hx = box.width() / n, hy = box.height() / n;
  std::vector<std::vector<int>> buckets(std::size_t(n) * n);
  for (std::size_t id = 0; id < inf.size(); ++id) {
    const Box& b = inf[id].box;
    const int i0 = std::clamp(static_cast<int>(std::floor((b.lo.x - box.lo.x) / hx)), 0, n - 1);
    const int i1 = std::clamp(static_cast<int>(std::floor((b.hi.x - box.lo.x) / hx)), 0, n - 1);
    const int j0 = std::clamp(static_cast<int>(std::floor((b.lo.y - box.lo.y) / hy)), 0, n - 1);
    const int j1 = std::clamp(static_cast<int>(std::floor((b.hi.y - box.lo.y) / hy)), 0, n - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets[std::size_t(j) * n + i].push_back(static_cast<int>(id));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double sx = U(rng), sy = U(rng);
  int K = 1;
  for (int s = 1; s <= samples; ++s) {
    Vec2 h = halton2(static_cast<std::uint64_t>(s));
    h.x = std::fmod(h.x + sx, 1.0);
    h.y = std::fmod(h.y + sy, 1.0);
    const Point p{box.lo.x + h.x * box.width(), box.lo.y + h.y * box.height()};
    const int i = std::clamp(static_cast<int>((p.x - box.lo.x) / hx), 0, n - 1);
    const int j = std::clamp(static_cast<int>((p.y - box.lo.y) / hy), 0, n - 1);
    int count = 0;
    for (int id : buckets[std::size_t(j) * n + i]) {
      const auto& c = inf[id];
      if (!c.box.contains(p)) continue;
      if (c.poly.contains(p) || distance(c.poly, p) <= c.r) ++count;
    }
    K = std::max(K, count);
  }
  return K;
}

inline MeshStats mesh_stats(const Mesh& mesh, int overlap_samples = 20000, std::uint64_t seed = 0) {
  if (mesh.empty()) throw PreconditionError("nonempty_mesh", "mesh has no cells");
  MeshStats s;
  s.cells = mesh.size();
  s.alpha = regularity_alpha(mesh);
  s.k = 0.0;
  s.min_diam = std::numeric_limits<double>::infinity();
  for (const auto& c : mesh.cells()) {
    const double d = diam(c.shape);
    s.k = std::max(s.k, d);
    s.min_diam = std::min(s.min_diam, d);
  }
  s.gamma = s.min_diam / s.k;
  s.K = overlap_samples > 0 ? overlap_constant(mesh, overlap_samples, seed) : 1;
  return s;
}

/// Largest pairwise clipped-intersection area relative to the smaller cell,
/// over pairs with overlapping bounding boxes.
inline double max_relative_overlap(const Mesh& mesh) {
  if (mesh.empty()) return 0.0;
  std::vector<ConvexPolygon> polys;
  std::vector<Box> boxes;
  for (const auto& c : mesh.cells()) {
    polys.push_back(polygon(c.shape));
    boxes.push_back(polys.back().bbox());
  }
  const Box all = mesh.bbox();
  const int n = std::clamp(static_cast<int>(std::sqrt(double(polys.size()))), 1, 1024);
  const double hx = std::max(all.width(), 1e-300) / n, hy = std::max(all.height(), 1e-300) / n;
  auto bx = [&](double x) { return std::clamp(static_cast<int>((x - all.lo.x) / hx), 0, n - 1); };
  auto by = [&](double y) { return std::clamp(static_cast<int>((y - all.lo.y) / hy), 0, n - 1); };
  std::vector<std::vector<int>> buckets(std::size_t(n) * n);
  for (std::size_t id = 0; id < boxes.size(); ++id)
    for (int j = by(boxes[id].lo.y); j <= by(boxes[id].hi.y); ++j)
      for (int i = bx(boxes[id].lo.x); i <= bx(boxes[id].hi.x); ++i)
        buckets[std::size_t(j) * n + i].push_back(static_cast<int>(id));
  double worst = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const auto& b = buckets[std::size_t(j) * n + i];
      for (std::size_t u = 0; u < b.size(); ++u)
        for (std::size_t v = u + 1; v < b.size(); ++v) {
          const Box& p = boxes[b[u]];
          const Box& q = boxes[b[v]];
          if (!p.overlaps(q)) continue;
          // Visit each pair once: in the bucket holding the overlap's lower-left corner.
          if (bx(std::max(p.lo.x, q.lo.x)) != i || by(std::max(p.lo.y, q.lo.y)) != j) continue;
          const ConvexPolygon x = intersect(polys[b[u]], polys[b[v]]);
          if (x.empty()) continue;
          worst = std::max(worst, x.area() / std::min(polys[b[u]].area(), polys[b[v]].area()));
        }
    }
  return worst;
}

// ---------------------------------------------------------------------------

/// Grid of squares (or rectangles) split into two triangles each; the grid is
/// the coarsest one with cell diameter <= k_target.
inline Mesh uniform_triangulation(const Box& domain, double k_target, CellRole role = CellRole::Regular) {
  if (!(k_target > 0.0)) throw PreconditionError("positive_k", "k_target must be > 0");
  if (!(domain.width() > 0.0 && domain.height() > 0.0))
    throw PreconditionError("nonempty_domain", "domain must have positive area");
  const double h = k_target / std::sqrt(2.0);
  const int nx = std::max(1, static_cast<int>(std::ceil(domain.width() / h - 1e-9)));
  const int ny = std::max(1, static_cast<int>(std::ceil(domain.height() / h - 1e-9)));
  Mesh m;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      auto X = [&](int a) { return a == nx ? domain.hi.x : domain.lo.x + domain.width() * a / nx; };
      auto Y = [&](int b) { return b == ny ? domain.hi.y : domain.lo.y + domain.height() * b / ny; };
      const Point p00{X(i), Y(j)}, p10{X(i + 1), Y(j)}, p11{X(i + 1), Y(j + 1)}, p01{X(i), Y(j + 1)};
      m.add(Simplex(p00, p10, p11), role);
      m.add(Simplex(p00, p11, p01), role);
    }
  return m;
}

// ---------------------------------------------------------------------------

struct AnnulusInfo {
  double eta = 0.0;
  int depth = 0;
  double residual_width = 0.0;
  double residual_area = 0.0;
  double ratio_min = 0.0, ratio_max = 0.0;  ///< diam / dist(., outer boundary), regular cells
};

namespace detail {

inline bool near(double a, double b, double scale) { return std::abs(a - b) <= 1e-9 * std::max(1.0, scale); }

inline bool is_multiple(double len, double step) {
  const double q = len / step;
  return std::abs(q - std::round(q)) <= 1e-7 && std::round(q) >= 1;
}

}  // namespace detail

/// Dyadic annulus triangulation of Q minus Q0. Layer l (1..L) has width
/// eta 2^-l, inner node spacing eta 2^-l and outer spacing eta 2^-(l+1). The
/// last frame of width eta 2^-L next to the outer boundary is triangulated
/// as well and tagged residual.
inline Mesh whitney_annulus(const RotatedRect& Q, const RotatedRect& Q0, int L, AnnulusInfo* info = nullptr) {
  if (L < 1) throw PreconditionError("depth", "annulus depth must be >= 1");
  const double scale = Q.diam();
  const Vec2 ax = Q.axis(), ax0 = Q0.axis();
  const bool parallel = std::abs(cross(ax, ax0)) <= 1e-12 && dot(ax, ax0) > 0;
  if (!parallel || distance(Q.center(), Q0.center()) > 1e-12 * scale)
    throw PreconditionError("concentric", "Q and Q0 must be concentric with equal axes");
  const double eta = Q.half_a() - Q0.half_a();
  if (!(eta > 0.0) || !detail::near(Q.half_b() - Q0.half_b(), eta, scale * 1e-3))
    throw PreconditionError("uniform_gap", "gap between Q and Q0 must be uniform and positive");
  if (!detail::is_multiple(2 * Q0.half_a(), eta / 2) || !detail::is_multiple(2 * Q0.half_b(), eta / 2))
    throw PreconditionError("node_alignment", "inner sides must be multiples of eta/2");

  Mesh m;
  // Nodes shared by neighbouring cells are reached by different arithmetic;
  // map each node to world coordinates once so the copies agree exactly.
  // Distinct nodes are at least eta 2^-(L+1) apart.
  const double quantum = eta * std::ldexp(1.0, -(L + 3));
  std::map<std::pair<long long, long long>, Point> nodes;
  auto world = [&](Vec2 l) {
    const std::pair<long long, long long> k{std::llround(l.x / quantum), std::llround(l.y / quantum)};
    return nodes.try_emplace(k, Q.to_world(l)).first->second;
  };
  auto add = [&](Vec2 a, Vec2 b, Vec2 c, CellRole role) { m.add(Simplex(world(a), world(b), world(c)), role); };

  double ha = Q0.half_a(), hb = Q0.half_b();
  for (int l = 1; l <= L + 1; ++l) {
    const bool residual = l == L + 1;
    const double w = residual ? eta * std::ldexp(1.0, -L) : eta * std::ldexp(1.0, -l);
    const double inner_step = residual ? w / 2 : w;
    const CellRole role = residual ? CellRole::Residual : CellRole::Regular;
    // Sides: start corner, tangent, outward normal, length; counterclockwise.
    struct Side {
      Vec2 start, t, o;
      double len;
    };
    const Side sides[4] = {
        {{-ha, -hb}, {1, 0}, {0, -1}, 2 * ha},  // bottom
        {{ha, -hb}, {0, 1}, {1, 0}, 2 * hb},    // right
        {{ha, hb}, {-1, 0}, {0, 1}, 2 * ha},    // top
        {{-ha, hb}, {0, -1}, {-1, 0}, 2 * hb},  // left
    };
    for (const Side& s : sides) {
      const int cols = static_cast<int>(std::lround(s.len / inner_step));
      for (int c = 0; c < cols; ++c) {
        const Vec2 A = s.start + (c * inner_step) * s.t;
        const Vec2 B = s.start + ((c + 1) * inner_step) * s.t;
        const Vec2 C = A + w * s.o, D = B + w * s.o;
        if (residual) {
          add(A, B, D, role);
          add(A, D, C, role);
        } else {
          const Vec2 M = 0.5 * (C + D);
          add(A, B, M, role);
          add(A, M, C, role);
          add(B, D, M, role);
        }
      }
      // Corner square at the end of this side, between its outward direction
      // and the next side's outward direction (= this side's tangent).
      const Vec2 P = s.start + s.len * s.t;
      const Vec2 T0 = P + w * s.o, R0 = P + w * s.t, Cc = P + w * s.o + w * s.t;
      if (residual) {
        add(P, R0, Cc, role);
        add(P, Cc, T0, role);
      } else {
        const Vec2 Tm = 0.5 * (T0 + Cc), Rm = 0.5 * (R0 + Cc);
        add(P, Rm, R0, role);
        add(P, Cc, Rm, role);
        add(P, Tm, Cc, role);
        add(P, T0, Tm, role);
      }
    }
    ha += w;
    hb += w;
  }

  if (info) {
    info->eta = eta;
    info->depth = L;
    info->residual_width = eta * std::ldexp(1.0, -L);
    info->residual_area = m.area(CellRole::Residual);
    const ConvexPolygon outer(Q);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& c : m.cells()) {
      if (c.role != CellRole::Regular) continue;
      double d = std::numeric_limits<double>::infinity();
      for (Point p : polygon(c.shape).vertices()) d = std::min(d, distance_to_boundary(outer, p));
      const double r = diam(c.shape) / d;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    info->ratio_min = lo;
    info->ratio_max = hi;
  }
  return m;
}

// ---------------------------------------------------------------------------

/// Slabs of the cube Q0 shifted by theta * half * n: N congruent rectangles of
/// width 2 half / N along n. Q0's axis must be n.
inline std::vector<RotatedRect> slab_decomposition(const RotatedRect& Q0, Vec2 n, int N, double theta = 0.0) {
  if (N < 1) throw PreconditionError("positive_N", "N must be >= 1");
  if (std::abs(norm(n) - 1.0) > 1e-12) throw PreconditionError("unit_direction", "n must be a unit vector");
  if (std::abs(cross(Q0.axis(), n)) > 1e-12 || dot(Q0.axis(), n) < 0)
    throw PreconditionError("aligned_cube", "cube axis must equal n");
  std::vector<RotatedRect> slabs;
  const double a = Q0.half_a();
  const double hw = a / N;
  for (int j = 0; j < N; ++j) {
    const double t = -1.0 + (2.0 * j + 1.0) / N + theta;
    slabs.emplace_back(Q0.center() + (t * a) * n, n, hw, Q0.half_b());
  }
  return slabs;
}

struct SlabMatchReport {
  int checked = 0;
  std::vector<int> mismatches;
};

/// Every cell touching the boundary of the union of the slabs must touch it
/// within the boundary of a single slab.
inline SlabMatchReport match_to_slabs(const Mesh& mesh, const std::vector<RotatedRect>& slabs) {
  if (slabs.empty()) throw PreconditionError("nonempty_slabs", "no slabs given");
  const RotatedRect& f = slabs.front();
  const RotatedRect& b = slabs.back();
  const Point center = 0.5 * (f.center() + b.center());
  const RotatedRect Q0(center, f.axis(), f.half_a() * static_cast<double>(slabs.size()), f.half_b());
  const ConvexPolygon q0(Q0);
  const double tol = 1e-9 * Q0.diam();
  std::vector<ConvexPolygon> sp;
  for (const auto& s : slabs) sp.emplace_back(s);

  auto on_boundary = [&](const ConvexPolygon& p, Point x) {
    return p.contains(x, tol) && distance_to_boundary(p, x) <= tol;
  };
  SlabMatchReport rep;
  for (const auto& c : mesh.cells()) {
    const ConvexPolygon poly = polygon(c.shape);
    std::vector<Point> contact;
    for (Point v : poly.vertices())
      if (on_boundary(q0, v)) contact.push_back(v);
    for (const auto& e : poly.edges())
      if (on_boundary(q0, e.a) && on_boundary(q0, e.b) && on_boundary(q0, e.midpoint()))
        contact.push_back(e.midpoint());
    if (contact.empty()) continue;
    ++rep.checked;
    bool ok = false;
    for (const auto& s : sp) {
      ok = std::all_of(contact.begin(), contact.end(), [&](Point x) { return on_boundary(s, x); });
      if (ok) break;
    }
    if (!ok) rep.mismatches.push_back(c.id);
  }
  return rep;
}

}  // namespace bvpa
