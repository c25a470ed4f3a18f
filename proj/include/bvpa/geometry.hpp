#pragma once

// Planar affine geometry: points, simplices, rotated rectangles, convex
// polygons and half-plane clipping. Everything is double precision and
// immutable after construction.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "bvpa/error.hpp"
#include "bvpa/value.hpp"

namespace bvpa {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(Vec2 o) noexcept { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) noexcept { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) noexcept { x *= s; y *= s; return *this; }
  friend Vec2 operator+(Vec2 a, Vec2 b) noexcept { return a += b; }
  friend Vec2 operator-(Vec2 a, Vec2 b) noexcept { return a -= b; }
  friend Vec2 operator-(Vec2 a) noexcept { return {-a.x, -a.y}; }
  friend Vec2 operator*(double s, Vec2 a) noexcept { return a *= s; }
  friend Vec2 operator*(Vec2 a, double s) noexcept { return a *= s; }
  friend Vec2 operator/(Vec2 a, double s) noexcept { return {a.x / s, a.y / s}; }
  friend bool operator==(Vec2 a, Vec2 b) noexcept = default;
};
using Point = Vec2;

inline double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) noexcept { return norm(a - b); }
inline Vec2 perp(Vec2 a) noexcept { return {-a.y, a.x}; }
inline Vec2 normalized(Vec2 a) {
  const double n = norm(a);
  if (!(n > 0.0)) throw PreconditionError("nonzero_vector", "cannot normalize zero vector");
  return a / n;
}
inline Vec2 rotate(Vec2 a, double angle) noexcept {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}
inline Vec2 unit_from_angle(double angle) noexcept { return {std::cos(angle), std::sin(angle)}; }

/// m x 2 matrix, one row per component; gradients of R^m-valued maps.
struct Jacobian {
  std::array<Vec2, kMaxComponents> rows{};
  int m = 0;

  explicit Jacobian(int m_ = 0) : m(m_) {}
  double frobenius() const noexcept {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += dot(rows[i], rows[i]);
    return std::sqrt(s);
  }
  Jacobian& operator-=(const Jacobian& o) noexcept {
    for (int i = 0; i < m; ++i) rows[i] -= o.rows[i];
    return *this;
  }
  Jacobian& operator+=(const Jacobian& o) noexcept {
    for (int i = 0; i < m; ++i) rows[i] += o.rows[i];
    return *this;
  }
  friend Jacobian operator-(Jacobian a, const Jacobian& b) noexcept { return a -= b; }
  friend Jacobian operator+(Jacobian a, const Jacobian& b) noexcept { return a += b; }
};

struct Segment {
  Point a;
  Point b;
  double length() const noexcept { return distance(a, b); }
  Point at(double t) const noexcept { return a + t * (b - a); }
  Point midpoint() const noexcept { return 0.5 * (a + b); }
};

/// The line {p : (p - point) . normal = 0}; normal need not be unit.
struct Line {
  Point point;
  Vec2 normal;
  double side(Point p) const noexcept { return dot(p - point, normal); }
};

struct Box {
  Point lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Point hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};

  void expand(Point p) noexcept {
    lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y);
  }
  void inflate(double r) noexcept { lo -= Vec2{r, r}; hi += Vec2{r, r}; }
  bool overlaps(const Box& o) const noexcept {
    return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y && o.lo.y <= hi.y;
  }
  bool contains(Point p) const noexcept {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
  }
  double width() const noexcept { return hi.x - lo.x; }
  double height() const noexcept { return hi.y - lo.y; }
  double diagonal() const noexcept { return std::hypot(width(), height()); }
};

// ---------------------------------------------------------------------------

inline constexpr double kDegeneracyTolerance = 1e-14;

/// Triangle with affinely independent vertices.
class Simplex {
 public:
  Simplex(Point v0, Point v1, Point v2) : v_{v0, v1, v2} {
    const double d = diam();
    if (!(std::abs(signed_area()) > kDegeneracyTolerance * d * d) || !std::isfinite(d))
      throw DegenerateSimplexError("vertices are (nearly) collinear");
  }

  const std::array<Point, 3>& vertices() const noexcept { return v_; }
  Point operator[](int i) const noexcept { return v_[i]; }

  double signed_area() const noexcept { return 0.5 * cross(v_[1] - v_[0], v_[2] - v_[0]); }
  double measure() const noexcept { return std::abs(signed_area()); }
  double diam() const noexcept {
    return std::max({distance(v_[0], v_[1]), distance(v_[1], v_[2]), distance(v_[2], v_[0])});
  }
  Point centroid() const noexcept { return (v_[0] + v_[1] + v_[2]) / 3.0; }

 private:
  std::array<Point, 3> v_;
};

inline std::array<double, 3> barycentric(const Simplex& s, Point p) {
  const Point a = s[0], b = s[1], c = s[2];
  const double det = cross(b - a, c - a);
  const double l1 = cross(p - a, c - a) / det;
  const double l2 = cross(b - a, p - a) / det;
  return {1.0 - l1 - l2, l1, l2};
}

inline bool contains(const Simplex& s, Point p, double tol = 0.0) {
  const auto l = barycentric(s, p);
  return l[0] >= -tol && l[1] >= -tol && l[2] >= -tol;
}

/// Affine map R^2 -> R^m, x -> linear * x + offset.
struct AffineMap {
  Jacobian linear;
  Value offset;

  AffineMap() = default;
  AffineMap(Jacobian l, Value o) : linear(l), offset(o) {}
  static AffineMap constant(const Value& c) { return {Jacobian(c.size()), c}; }

  int components() const noexcept { return offset.size(); }
  Value operator()(Point p) const noexcept {
    Value r = offset;
    for (int i = 0; i < r.size(); ++i) r[i] += dot(linear.rows[i], p);
    return r;
  }
  friend AffineMap operator+(const AffineMap& a, const AffineMap& b) {
    return {a.linear + b.linear, a.offset + b.offset};
  }
};

/// The affine map taking `values[j]` at vertex j.
inline AffineMap affine_from_vertex_values(const Simplex& s, std::span<const Value, 3> values) {
  const int m = values[0].size();
  const Vec2 e1 = s[1] - s[0], e2 = s[2] - s[0];
  const double det = cross(e1, e2);
  // Inverse of [e1 e2] (columns), applied to value differences.
  AffineMap map{Jacobian(m), Value(m)};
  for (int i = 0; i < m; ++i) {
    const double d1 = values[1][i] - values[0][i];
    const double d2 = values[2][i] - values[0][i];
    const Vec2 g{(d1 * e2.y - d2 * e1.y) / det, (-d1 * e2.x + d2 * e1.x) / det};
    map.linear.rows[i] = g;
    map.offset[i] = values[0][i] - dot(g, s[0]);
  }
  return map;
}

inline AffineMap affine_from_vertex_values(const Simplex& s, const std::array<Value, 3>& values) {
  return affine_from_vertex_values(s, std::span<const Value, 3>(values));
}

inline Simplex dilate_about_centroid(const Simplex& s, double r) {
  if (!(r > 0.0)) throw PreconditionError("positive_factor", "dilation factor must be > 0");
  const Point c = s.centroid();
  return {c + r * (s[0] - c), c + r * (s[1] - c), c + r * (s[2] - c)};
}

// ---------------------------------------------------------------------------

/// Rectangle center + [-a,a] x [-b,b] in the orthonormal frame (axis, perp(axis)).
class RotatedRect {
 public:
  RotatedRect(Point center, Vec2 axis, double half_a, double half_b)
      : center_(center), axis_(axis), a_(half_a), b_(half_b) {
    if (std::abs(norm(axis) - 1.0) > 1e-12)
      throw PreconditionError("unit_axis", "rectangle axis must be a unit vector");
    if (!(half_a > 0.0) || !(half_b > 0.0))
      throw PreconditionError("positive_half_lengths", "rectangle half lengths must be > 0");
  }
  static RotatedRect axis_aligned(Point lo, Point hi) {
    return {0.5 * (lo + hi), {1.0, 0.0}, 0.5 * (hi.x - lo.x), 0.5 * (hi.y - lo.y)};
  }

  Point center() const noexcept { return center_; }
  Vec2 axis() const noexcept { return axis_; }
  Vec2 cross_axis() const noexcept { return perp(axis_); }
  double half_a() const noexcept { return a_; }
  double half_b() const noexcept { return b_; }

  double measure() const noexcept { return 4.0 * a_ * b_; }
  double perimeter() const noexcept { return 4.0 * (a_ + b_); }
  double diam() const noexcept { return 2.0 * std::hypot(a_, b_); }

  /// Local (along axis, along cross axis) coordinates.
  Vec2 to_local(Point p) const noexcept {
    const Vec2 d = p - center_;
    return {dot(d, axis_), dot(d, cross_axis())};
  }
  Point to_world(Vec2 l) const noexcept { return center_ + l.x * axis_ + l.y * cross_axis(); }

  /// Counterclockwise corners starting at local (-a,-b).
  std::array<Point, 4> corners() const noexcept {
    return {to_world({-a_, -b_}), to_world({a_, -b_}), to_world({a_, b_}), to_world({-a_, b_})};
  }
  bool contains(Point p, double tol = 0.0) const noexcept {
    const Vec2 l = to_local(p);
    return std::abs(l.x) <= a_ + tol && std::abs(l.y) <= b_ + tol;
  }

 private:
  Point center_;
  Vec2 axis_;
  double a_;
  double b_;
};

// ---------------------------------------------------------------------------

/// Convex polygon with counterclockwise vertices. May be empty.
class ConvexPolygon {
 public:
  ConvexPolygon() = default;
  explicit ConvexPolygon(std::vector<Point> v) : v_(std::move(v)) {
    if (v_.size() >= 3 && signed_area_of(v_) < 0.0) std::reverse(v_.begin(), v_.end());
  }
  explicit ConvexPolygon(const Simplex& s) : ConvexPolygon(std::vector<Point>{s[0], s[1], s[2]}) {}
  explicit ConvexPolygon(const RotatedRect& r) {
    const auto c = r.corners();
    v_.assign(c.begin(), c.end());
  }
  static ConvexPolygon from_box(const Box& b) {
    return ConvexPolygon(std::vector<Point>{b.lo, {b.hi.x, b.lo.y}, b.hi, {b.lo.x, b.hi.y}});
  }

  const std::vector<Point>& vertices() const& noexcept { return v_; }
  std::vector<Point> vertices() && noexcept { return std::move(v_); }
  std::size_t size() const noexcept { return v_.size(); }
  bool empty() const noexcept { return v_.size() < 3 || !(area() > 0.0); }

  double area() const noexcept { return v_.size() < 3 ? 0.0 : signed_area_of(v_); }
  double perimeter() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < v_.size(); ++i) s += distance(v_[i], v_[(i + 1) % v_.size()]);
    return v_.size() < 2 ? 0.0 : s;
  }
  Point centroid() const noexcept {
    if (v_.size() < 3) return v_.empty() ? Point{} : v_[0];
    // Relative to the first vertex to avoid cancellation.
    const Point o = v_[0];
    double a = 0.0;
    Vec2 c{};
    for (std::size_t i = 1; i + 1 < v_.size(); ++i) {
      const Vec2 p = v_[i] - o, q = v_[i + 1] - o;
      const double w = cross(p, q);
      a += w;
      c += w * (p + q);
    }
    return a == 0.0 ? o : o + c / (3.0 * a);
  }
  Box bbox() const noexcept {
    Box b;
    for (Point p : v_) b.expand(p);
    return b;
  }
  double diam() const noexcept {
    double d = 0.0;
    for (std::size_t i = 0; i < v_.size(); ++i)
      for (std::size_t j = i + 1; j < v_.size(); ++j) d = std::max(d, distance(v_[i], v_[j]));
    return d;
  }
  std::vector<Segment> edges() const {
    std::vector<Segment> e;
    for (std::size_t i = 0; i < v_.size(); ++i) e.push_back({v_[i], v_[(i + 1) % v_.size()]});
    return e;
  }
  bool contains(Point p, double tol = 0.0) const noexcept {
    for (std::size_t i = 0; i < v_.size(); ++i) {
      const Point a = v_[i], b = v_[(i + 1) % v_.size()];
      const double len = distance(a, b);
      if (len == 0.0) continue;
      if (cross(b - a, p - a) / len < -tol) return false;
    }
    return v_.size() >= 3;
  }

 private:
  static double signed_area_of(const std::vector<Point>& v) noexcept {
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) s += cross(v[i] - v[0], v[i + 1] - v[0]);
    return 0.5 * s;
  }
  std::vector<Point> v_;
};

namespace detail {

inline std::vector<Point> dedupe(std::vector<Point> pts, double tol) {
  std::vector<Point> out;
  for (Point p : pts)
    if (out.empty() || distance(out.back(), p) > tol) out.push_back(p);
  while (out.size() > 1 && distance(out.front(), out.back()) <= tol) out.pop_back();
  return out;
}

}  // namespace detail

/// Splits `poly` by `line` into (part with side <= 0, part with side >= 0).
/// Either may be empty.
inline std::pair<ConvexPolygon, ConvexPolygon> clip_halfplane(const ConvexPolygon& poly, const Line& line) {
  const auto& v = poly.vertices();
  if (v.size() < 3) return {};
  const double scale = std::max(poly.diam(), 1e-300);
  const double nn = norm(line.normal);
  const double tol = 1e-14 * scale;
  std::vector<double> s(v.size());
  bool any_neg = false, any_pos = false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    s[i] = line.side(v[i]) / nn;
    if (std::abs(s[i]) <= tol) s[i] = 0.0;
    any_neg |= s[i] < 0.0;
    any_pos |= s[i] > 0.0;
  }
  if (!any_pos) return {poly, ConvexPolygon{}};
  if (!any_neg) return {ConvexPolygon{}, poly};
  std::vector<Point> neg, pos;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t j = (i + 1) % v.size();
    if (s[i] <= 0.0) neg.push_back(v[i]);
    if (s[i] >= 0.0) pos.push_back(v[i]);
    if ((s[i] < 0.0 && s[j] > 0.0) || (s[i] > 0.0 && s[j] < 0.0)) {
      const double t = s[i] / (s[i] - s[j]);
      const Point x = v[i] + t * (v[j] - v[i]);
      neg.push_back(x);
      pos.push_back(x);
    }
  }
  auto make = [&](std::vector<Point> pts) {
    pts = detail::dedupe(std::move(pts), tol);
    ConvexPolygon p(std::move(pts));
    return p.empty() ? ConvexPolygon{} : p;
  };
  return {make(std::move(neg)), make(std::move(pos))};
}

/// Intersection of two convex polygons.
/// Convex hull (monotone chain), counterclockwise.
inline ConvexPolygon convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end(), [](Point a, Point b) { return a.x == b.x && a.y == b.y; }), pts.end());
  if (pts.size() < 3) return ConvexPolygon(pts);
  std::vector<Point> h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return ConvexPolygon(std::move(h));
}

inline ConvexPolygon intersect(const ConvexPolygon& a, const ConvexPolygon& b) {
  ConvexPolygon out = a;
  const auto& v = b.vertices();
  for (std::size_t i = 0; i < v.size() && !out.empty(); ++i) {
    const Point p = v[i], q = v[(i + 1) % v.size()];
    if (p == q) continue;
    // Interior of a CCW polygon lies to the left: keep side <= 0 for normal = right-hand normal.
    const Vec2 outward{q.y - p.y, p.x - q.x};
    out = clip_halfplane(out, {p, outward}).first;
  }
  return out;
}

inline Point closest_point_on_segment(const Segment& s, Point p) noexcept {
  const Vec2 d = s.b - s.a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return s.a;
  const double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
  return s.a + t * d;
}

inline Point closest_point(const ConvexPolygon& poly, Point p) {
  if (poly.contains(p)) return p;
  Point best = poly.vertices().empty() ? p : poly.vertices()[0];
  double bd = std::numeric_limits<double>::infinity();
  for (const auto& e : poly.edges()) {
    const Point c = closest_point_on_segment(e, p);
    const double d = distance(c, p);
    if (d < bd) { bd = d; best = c; }
  }
  return best;
}

inline double distance(const ConvexPolygon& poly, Point p) { return distance(closest_point(poly, p), p); }

/// Distance from an interior point to the polygon boundary.
inline double distance_to_boundary(const ConvexPolygon& poly, Point p) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& e : poly.edges()) d = std::min(d, distance(closest_point_on_segment(e, p), p));
  return d;
}

/// Portion of a segment inside a convex polygon as a parameter range [t0, t1] in [0,1].
inline std::optional<std::pair<double, double>> clip_segment(const Segment& seg, const ConvexPolygon& poly) {
  double t0 = 0.0, t1 = 1.0;
  const auto& v = poly.vertices();
  if (v.size() < 3) return std::nullopt;
  const Vec2 d = seg.b - seg.a;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point p = v[i], q = v[(i + 1) % v.size()];
    const Vec2 inward = perp(q - p);  // CCW: interior on the left
    const double num = dot(seg.a - p, inward);
    const double den = dot(d, inward);
    if (den == 0.0) {
      if (num < 0.0) return std::nullopt;
      continue;
    }
    const double t = -num / den;
    if (den > 0.0) t0 = std::max(t0, t);
    else t1 = std::min(t1, t);
    if (t0 > t1) return std::nullopt;
  }
  return std::make_pair(t0, t1);
}

// ---------------------------------------------------------------------------

using Cell = std::variant<Simplex, RotatedRect>;

inline ConvexPolygon polygon(const Cell& c) {
  return std::visit([](const auto& s) { return ConvexPolygon(s); }, c);
}
inline double measure(const Cell& c) {
  return std::visit([](const auto& s) { return s.measure(); }, c);
}
inline double diam(const Cell& c) {
  return std::visit([](const auto& s) { return s.diam(); }, c);
}
inline double measure(const Simplex& s) { return s.measure(); }
inline double diam(const Simplex& s) { return s.diam(); }

inline std::vector<Segment> boundary_edges(const Cell& c) { return polygon(c).edges(); }

inline Point centroid(const Cell& c) {
  if (const auto* s = std::get_if<Simplex>(&c)) return s->centroid();
  return std::get<RotatedRect>(c).center();
}

}  // namespace bvpa
