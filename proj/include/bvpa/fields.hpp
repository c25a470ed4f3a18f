#pragma once

// The model class of approximable functions u : R^2 -> R^m.
//
// Every field evaluates pointwise, reports one-sided traces, and describes
// its singular support explicitly (jump segments), so total variation and
// trace integrals can be computed without smearing jumps.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bvpa/error.hpp"
#include "bvpa/fieldlang.hpp"
#include "bvpa/geometry.hpp"
#include "bvpa/quadrature.hpp"
#include "bvpa/value.hpp"

namespace bvpa {

/// Per-component second-order jets.
struct Jets {
  std::array<Jet2, kMaxComponents> c{};
  int m = 0;

  Value value() const {
    Value v(m);
    for (int i = 0; i < m; ++i) v[i] = c[i].value;
    return v;
  }
  Jacobian gradient() const {
    Jacobian g(m);
    for (int i = 0; i < m; ++i) g.rows[i] = c[i].grad;
    return g;
  }
  /// Frobenius norm of the m x 2 x 2 Hessian tensor.
  double hessian_norm() const {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += c[i].hess_frobenius_sq();
    return std::sqrt(s);
  }
};

/// A jump of a field across a segment. `normal` is a unit vector pointing to
/// the "+" side; the jump is u(+) - u(-). `beta` carries the jump when it is
/// constant along the segment (size 0 otherwise).
struct JumpSegment {
  Segment seg;
  Vec2 normal;
  Value beta;
};

class Field {
 public:
  virtual ~Field() = default;

  virtual int components() const = 0;
  virtual Value eval(Point p) const = 0;

  /// Jets off the singular support; throws if unavailable.
  virtual bool has_jets() const { return false; }
  virtual Jets jets(Point) const { throw PreconditionError("jets_available", "field has no jets"); }
  Jacobian gradient(Point p) const { return jets(p).gradient(); }

  /// Limit of u(p + t * inward) as t -> 0+.
  virtual Value trace_eval(Point p, Vec2 /*inward*/) const { return eval(p); }

  virtual std::vector<JumpSegment> singular_support() const { return {}; }

  /// Lines across which the field may fail to be smooth (jumps and kinks).
  virtual std::vector<Line> structure_lines() const { return {}; }

  /// Splits a convex polygon into pieces on which the field is smooth.
  virtual std::vector<ConvexPolygon> smooth_pieces(const ConvexPolygon& poly) const {
    std::vector<ConvexPolygon> pieces{poly};
    for (const Line& l : structure_lines()) {
      std::vector<ConvexPolygon> next;
      for (const auto& p : pieces) {
        auto [a, b] = clip_halfplane(p, l);
        if (!a.empty()) next.push_back(std::move(a));
        if (!b.empty()) next.push_back(std::move(b));
      }
      pieces = std::move(next);
    }
    return pieces;
  }
};

using FieldPtr = std::shared_ptr<const Field>;

// ---------------------------------------------------------------------------

class ExprField final : public Field {
 public:
  explicit ExprField(std::vector<Expr> exprs) : exprs_(std::move(exprs)) {
    if (exprs_.empty() || exprs_.size() > kMaxComponents)
      throw PreconditionError("components", "expression field needs 1..4 components");
  }
  static std::shared_ptr<ExprField> from_text(const std::vector<std::string>& texts) {
    std::vector<Expr> e;
    for (const auto& t : texts) e.push_back(parse(t));
    return std::make_shared<ExprField>(std::move(e));
  }

  const std::vector<Expr>& exprs() const noexcept { return exprs_; }
  int components() const override { return static_cast<int>(exprs_.size()); }
  Value eval(Point p) const override {
    Value v(components());
    for (int i = 0; i < components(); ++i) v[i] = exprs_[i].value(p);
    return v;
  }
  bool has_jets() const override { return true; }
  Jets jets(Point p) const override {
    Jets j;
    j.m = components();
    for (int i = 0; i < j.m; ++i) j.c[i] = exprs_[i].jet(p);
    return j;
  }

 private:
  std::vector<Expr> exprs_;
};

// ---------------------------------------------------------------------------

/// Nondecreasing piecewise linear profile with finitely many jumps.
/// Breakpoint i carries the left and right limits; the profile is affine
/// between breakpoints and constant outside the outermost ones.
class MonotoneProfile {
 public:
  MonotoneProfile(std::vector<double> t, std::vector<double> left, std::vector<double> right)
      : t_(std::move(t)), left_(std::move(left)), right_(std::move(right)) {
    if (t_.empty() || t_.size() != left_.size() || t_.size() != right_.size())
      throw PreconditionError("profile_shape", "breakpoints and values must be nonempty and equal length");
    for (std::size_t i = 0; i < t_.size(); ++i) {
      if (!std::isfinite(t_[i]) || !std::isfinite(left_[i]) || !std::isfinite(right_[i]))
        throw PreconditionError("profile_finite", "profile data must be finite");
      if (left_[i] > right_[i]) throw PreconditionError("profile_monotone", "jump must be upward");
      if (i + 1 < t_.size()) {
        if (!(t_[i] < t_[i + 1])) throw PreconditionError("profile_increasing", "breakpoints must increase");
        if (right_[i] > left_[i + 1]) throw PreconditionError("profile_monotone", "slope must be nonnegative");
      }
    }
  }

  static MonotoneProfile heaviside(double at, double lo = 0.0, double hi = 1.0) {
    return {{at}, {lo}, {hi}};
  }
  /// psi(t) = t on [-R, R].
  static MonotoneProfile identity(double R = 4.0) { return {{-R, R}, {-R, R}, {-R, R}}; }

  const std::vector<double>& breakpoints() const noexcept { return t_; }
  const std::vector<double>& left_values() const noexcept { return left_; }
  const std::vector<double>& right_values() const noexcept { return right_; }

  /// Right-continuous evaluation.
  double operator()(double t) const { return right_limit(t); }

  double right_limit(double t) const {
    if (t < t_.front()) return left_.front();
    if (t >= t_.back()) return right_.back();
    const std::size_t i = interval(t);
    if (t == t_[i]) return right_[i];
    return interp(i, t);
  }
  double left_limit(double t) const {
    if (t <= t_.front()) return left_.front();
    if (t > t_.back()) return right_.back();
    const std::size_t i = interval(t);
    if (t == t_[i]) return left_[i];
    if (i + 1 < t_.size() && t == t_[i + 1]) return left_[i + 1];
    return interp(i, t);
  }
  /// Right derivative.
  double slope(double t) const {
    if (t < t_.front() || t >= t_.back()) return 0.0;
    const std::size_t i = interval(t);
    return (left_[i + 1] - right_[i]) / (t_[i + 1] - t_[i]);
  }

  /// Index of a jump breakpoint within tol of t, or -1.
  int jump_at(double t, double tol = 1e-12) const {
    for (std::size_t i = 0; i < t_.size(); ++i)
      if (right_[i] > left_[i] && std::abs(t - t_[i]) <= tol * std::max(1.0, std::abs(t_[i])))
        return static_cast<int>(i);
    return -1;
  }
  std::vector<std::pair<double, double>> jumps() const {
    std::vector<std::pair<double, double>> j;
    for (std::size_t i = 0; i < t_.size(); ++i)
      if (right_[i] > left_[i]) j.emplace_back(t_[i], right_[i] - left_[i]);
    return j;
  }

  /// Variation over the open interval (a, b).
  double variation(double a, double b) const { return left_limit(b) - right_limit(a); }

  /// The profile t -> psi(alpha + beta * t), beta > 0.
  MonotoneProfile reparametrized(double alpha, double beta) const {
    if (!(beta > 0.0)) throw PreconditionError("positive_scale", "reparametrization scale must be > 0");
    std::vector<double> t(t_.size());
    for (std::size_t i = 0; i < t_.size(); ++i) t[i] = (t_[i] - alpha) / beta;
    return {std::move(t), left_, right_};
  }

 private:
  std::size_t interval(double t) const {
    // Largest i with t_[i] <= t; requires t_.front() <= t < t_.back() or t == t_.back().
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - t_.begin()) - 1));
  }
  double interp(std::size_t i, double t) const {
    const double s = (t - t_[i]) / (t_[i + 1] - t_[i]);
    return right_[i] + s * (left_[i + 1] - right_[i]);
  }

  std::vector<double> t_, left_, right_;
};

/// Exact integral of |p - q| over [a, b] for piecewise linear profiles.
inline double profile_l1_distance(const MonotoneProfile& p, const MonotoneProfile& q, double a, double b) {
  std::vector<double> cuts{a, b};
  for (double t : p.breakpoints()) if (t > a && t < b) cuts.push_back(t);
  for (double t : q.breakpoints()) if (t > a && t < b) cuts.push_back(t);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double s = cuts[i], e = cuts[i + 1], h = e - s;
    const double ds = p.right_limit(s) - q.right_limit(s);
    const double de = p.left_limit(e) - q.left_limit(e);
    if (ds * de >= 0.0) total += 0.5 * h * (std::abs(ds) + std::abs(de));
    else total += 0.5 * h * (ds * ds + de * de) / (std::abs(ds) + std::abs(de));
  }
  return total;
}

// ---------------------------------------------------------------------------

/// u(x) = b * psi(((x - center) / scale) . n).
class JumpField final : public Field {
 public:
  JumpField(Value b, Vec2 n, MonotoneProfile psi, Point center = {}, double scale = 1.0, Box extent = default_extent())
      : b_(b), n_(n), psi_(std::move(psi)), center_(center), scale_(scale), extent_(extent) {
    if (std::abs(norm(n) - 1.0) > 1e-12) throw PreconditionError("unit_direction", "jump direction must be unit");
    if (!(scale > 0.0)) throw PreconditionError("positive_scale", "jump field scale must be > 0");
    if (b.size() < 1) throw PreconditionError("components", "amplitude must be nonempty");
  }
  static Box default_extent() { return Box{{-1e3, -1e3}, {1e3, 1e3}}; }

  const Value& amplitude() const noexcept { return b_; }
  Vec2 direction() const noexcept { return n_; }
  const MonotoneProfile& profile() const noexcept { return psi_; }
  Point center() const noexcept { return center_; }
  double scale() const noexcept { return scale_; }

  double coordinate(Point p) const noexcept { return dot(p - center_, n_) / scale_; }
  /// The point on the line coordinate == t closest to the center.
  Point line_point(double t) const noexcept { return center_ + (t * scale_) * n_; }

  int components() const override { return b_.size(); }
  Value eval(Point p) const override { return psi_(coordinate(p)) * b_; }
  bool has_jets() const override { return true; }
  Jets jets(Point p) const override {
    const double g = psi_.slope(coordinate(p)) / scale_;
    const double v = psi_(coordinate(p));
    Jets j;
    j.m = b_.size();
    for (int i = 0; i < j.m; ++i) j.c[i] = Jet2{b_[i] * v, (b_[i] * g) * n_, 0, 0, 0};
    return j;
  }
  Value trace_eval(Point p, Vec2 inward) const override {
    const double t = coordinate(p);
    const int k = psi_.jump_at(t);
    const double side = dot(inward, n_);
    if (k >= 0 && side != 0.0)
      return (side > 0 ? psi_.right_values()[k] : psi_.left_values()[k]) * b_;
    return eval(p);
  }
  std::vector<JumpSegment> singular_support() const override {
    std::vector<JumpSegment> out;
    const ConvexPolygon box = ConvexPolygon::from_box(extent_);
    for (auto [t, h] : psi_.jumps()) {
      const Point c = line_point(t);
      const double L = 2.0 * extent_.diagonal();
      const Segment full{c - L * perp(n_), c + L * perp(n_)};
      if (auto r = clip_segment(full, box)) {
        if (r->second - r->first <= 0.0) continue;
        out.push_back({{full.at(r->first), full.at(r->second)}, n_, h * b_});
      }
    }
    return out;
  }
  std::vector<Line> structure_lines() const override {
    std::vector<Line> out;
    for (double t : psi_.breakpoints()) out.push_back({line_point(t), n_});
    return out;
  }

 private:
  Value b_;
  Vec2 n_;
  MonotoneProfile psi_;
  Point center_;
  double scale_;
  Box extent_;
};

// ---------------------------------------------------------------------------

class SumField final : public Field {
 public:
  SumField(FieldPtr a, FieldPtr b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_->components() != b_->components())
      throw PreconditionError("components", "summands must have equal dimension");
  }
  const FieldPtr& first() const noexcept { return a_; }
  const FieldPtr& second() const noexcept { return b_; }

  int components() const override { return a_->components(); }
  Value eval(Point p) const override { return a_->eval(p) + b_->eval(p); }
  bool has_jets() const override { return a_->has_jets() && b_->has_jets(); }
  Jets jets(Point p) const override {
    Jets x = a_->jets(p);
    const Jets y = b_->jets(p);
    for (int i = 0; i < x.m; ++i) x.c[i] = x.c[i] + y.c[i];
    return x;
  }
  Value trace_eval(Point p, Vec2 n) const override { return a_->trace_eval(p, n) + b_->trace_eval(p, n); }
  std::vector<JumpSegment> singular_support() const override {
    auto s = a_->singular_support();
    for (auto& j : b_->singular_support()) s.push_back(j);
    return s;
  }
  std::vector<Line> structure_lines() const override {
    auto s = a_->structure_lines();
    for (auto& l : b_->structure_lines()) s.push_back(l);
    return s;
  }
  std::vector<ConvexPolygon> smooth_pieces(const ConvexPolygon& poly) const override {
    std::vector<ConvexPolygon> out;
    for (const auto& p : a_->smooth_pieces(poly))
      for (auto& q : b_->smooth_pieces(p)) out.push_back(std::move(q));
    return out;
  }

 private:
  FieldPtr a_, b_;
};

inline FieldPtr operator+(FieldPtr a, FieldPtr b) { return std::make_shared<SumField>(std::move(a), std::move(b)); }

// ---------------------------------------------------------------------------

/// u'(y) = (u(A y + origin) - shift) / divisor, A a 2x2 invertible matrix.
class PullbackField final : public Field {
 public:
  struct Mat2 {
    double a11 = 1, a12 = 0, a21 = 0, a22 = 1;
    Vec2 apply(Vec2 v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
    Vec2 apply_t(Vec2 v) const { return {a11 * v.x + a21 * v.y, a12 * v.x + a22 * v.y}; }
    double det() const { return a11 * a22 - a12 * a21; }
    Mat2 inverse() const {
      const double d = det();
      return {a22 / d, -a12 / d, -a21 / d, a11 / d};
    }
    static Mat2 rotation(double angle) {
      const double c = std::cos(angle), s = std::sin(angle);
      return {c, -s, s, c};
    }
    static Mat2 scaling(double r) { return {r, 0, 0, r}; }
  };

  PullbackField(FieldPtr u, Mat2 A, Point origin, Value shift, double divisor)
      : u_(std::move(u)), A_(A), Ainv_(A.inverse()), origin_(origin), shift_(shift), k_(divisor) {
    if (!(std::abs(A.det()) > 0.0)) throw PreconditionError("invertible_map", "pullback matrix is singular");
    if (!(divisor != 0.0)) throw PreconditionError("nonzero_divisor", "divisor must be nonzero");
    if (shift_.size() == 0) shift_ = Value(u_->components());
  }

  /// v(x) = u(R^T x): the field rotated by `angle` about the origin.
  static std::shared_ptr<PullbackField> rotated(FieldPtr u, double angle) {
    return std::make_shared<PullbackField>(std::move(u), Mat2::rotation(-angle), Point{}, Value(), 1.0);
  }

  Point forward(Point y) const { return A_.apply(y) + origin_; }
  Point backward(Point x) const { return Ainv_.apply(x - origin_); }

  int components() const override { return u_->components(); }
  Value eval(Point y) const override { return (1.0 / k_) * (u_->eval(forward(y)) - shift_); }
  bool has_jets() const override { return u_->has_jets(); }
  Jets jets(Point y) const override {
    Jets j = u_->jets(forward(y));
    for (int i = 0; i < j.m; ++i) {
      Jet2& c = j.c[i];
      const Vec2 g = A_.apply_t(c.grad);
      // A^T H A
      const double h11 = c.hxx * A_.a11 + c.hxy * A_.a21, h12 = c.hxx * A_.a12 + c.hxy * A_.a22;
      const double h21 = c.hxy * A_.a11 + c.hyy * A_.a21, h22 = c.hxy * A_.a12 + c.hyy * A_.a22;
      const double nxx = A_.a11 * h11 + A_.a21 * h21;
      const double nxy = A_.a11 * h12 + A_.a21 * h22;
      const double nyy = A_.a12 * h12 + A_.a22 * h22;
      c = Jet2{(c.value - shift_[i]) / k_, g / k_, nxx / k_, nxy / k_, nyy / k_};
    }
    return j;
  }
  Value trace_eval(Point y, Vec2 inward) const override {
    return (1.0 / k_) * (u_->trace_eval(forward(y), A_.apply(inward)) - shift_);
  }
  std::vector<JumpSegment> singular_support() const override {
    std::vector<JumpSegment> out;
    for (const auto& j : u_->singular_support()) {
      Vec2 n = A_.apply_t(j.normal);
      n = n / norm(n);
      Value beta = j.beta.size() ? (1.0 / k_) * j.beta : j.beta;
      out.push_back({{backward(j.seg.a), backward(j.seg.b)}, n, beta});
    }
    return out;
  }
  std::vector<Line> structure_lines() const override {
    std::vector<Line> out;
    for (const auto& l : u_->structure_lines()) out.push_back({backward(l.point), A_.apply_t(l.normal)});
    return out;
  }
  std::vector<ConvexPolygon> smooth_pieces(const ConvexPolygon& poly) const override {
    std::vector<Point> fw;
    for (Point p : poly.vertices()) fw.push_back(forward(p));
    std::vector<ConvexPolygon> out;
    for (const auto& piece : u_->smooth_pieces(ConvexPolygon(std::move(fw)))) {
      std::vector<Point> bw;
      for (Point p : piece.vertices()) bw.push_back(backward(p));
      ConvexPolygon q(std::move(bw));
      if (!q.empty()) out.push_back(std::move(q));
    }
    return out;
  }

 private:
  FieldPtr u_;
  Mat2 A_, Ainv_;
  Point origin_;
  Value shift_;
  double k_;
};

// ---------------------------------------------------------------------------

/// Convolution with the standard bump kernel of radius eps, by a tensor
/// Gauss-Legendre rule in polar coordinates. Outside `domain` the field is
/// continued by its value at the nearest domain point.
class MollifiedField final : public Field {
 public:
  static constexpr int kRadialNodes = 16;
  static constexpr int kAngularNodes = 16;

  MollifiedField(FieldPtr u, double eps, std::optional<ConvexPolygon> domain = std::nullopt)
      : u_(std::move(u)), eps_(eps), domain_(std::move(domain)) {
    if (!(eps > 0.0)) throw PreconditionError("positive_radius", "mollification radius must be > 0");
    smooth_ = u_->has_jets() && u_->structure_lines().empty() && u_->singular_support().empty();
  }

  double radius() const noexcept { return eps_; }
  const FieldPtr& base() const noexcept { return u_; }

  int components() const override { return u_->components(); }
  Value eval(Point p) const override {
    Value acc(components());
    for (const auto& k : kernel()) acc += k.w * sample(p - eps_ * k.z);
    return acc;
  }
  bool has_jets() const override { return true; }
  Jets jets(Point p) const override {
    const int m = components();
    Jets j;
    j.m = m;
    if (smooth_ && (!domain_ || inside(p))) {
      // Differentiate the discrete convolution itself, so jets agree with
      // finite differences of eval().
      for (const auto& k : kernel()) {
        const Jets uj = u_->jets(p - eps_ * k.z);
        for (int i = 0; i < m; ++i) j.c[i] = j.c[i] + k.w * uj.c[i];
      }
      return j;
    }
    const double ie = 1.0 / eps_, ie2 = ie * ie;
    for (const auto& k : kernel()) {
      const Value v = sample(p - eps_ * k.z);
      for (int i = 0; i < m; ++i) {
        Jet2& c = j.c[i];
        c.value += k.w * v[i];
        c.grad += (ie * v[i]) * k.g;
        c.hxx += ie2 * v[i] * k.hxx;
        c.hxy += ie2 * v[i] * k.hxy;
        c.hyy += ie2 * v[i] * k.hyy;
      }
    }
    return j;
  }

  struct KernelNode {
    Vec2 z;
    double w;  ///< quadrature weight times normalized kernel
    Vec2 g;    ///< weight times kernel gradient
    double hxx, hxy, hyy;
  };

  /// Normalized so that the discrete kernel mass is exactly one.
  static const std::vector<KernelNode>& kernel() {
    static const std::vector<KernelNode> nodes = build_kernel();
    return nodes;
  }

 private:
  bool inside(Point p) const {
    if (!domain_->contains(p)) return false;
    return distance_to_boundary(*domain_, p) >= eps_;
  }
  Value sample(Point y) const {
    if (domain_ && !domain_->contains(y)) y = closest_point(*domain_, y);
    return u_->eval(y);
  }

  static double solve3(std::array<std::array<double, 4>, 3> a, int col) {
    auto det = [](const std::array<std::array<double, 4>, 3>& m, int skip, int with) {
      auto c = [&](int r, int k) { return m[r][k == skip ? with : k]; };
      return c(0, 0) * (c(1, 1) * c(2, 2) - c(1, 2) * c(2, 1)) - c(0, 1) * (c(1, 0) * c(2, 2) - c(1, 2) * c(2, 0)) +
             c(0, 2) * (c(1, 0) * c(2, 1) - c(1, 1) * c(2, 0));
    };
    return det(a, col, 3) / det(a, -1, 3);
  }

  // The radial rule resolves the kernel derivatives only to about 1e-4, so the
  // derivative weights are corrected to reproduce the exact low moments:
  // sum g z^T = -I, sum H = 0, sum H_xx z_x^2 = 2, sum H_xx z_y^2 = 0,
  // sum H_xy z_x z_y = 1. Jets of quadratics are then exact.
  static std::vector<KernelNode> build_kernel() {
    const auto& gr = gauss_legendre(kRadialNodes);
    const auto& ga = gauss_legendre(kAngularNodes);
    struct Raw {
      Vec2 z;
      double w, q, phi;
      Vec2 g;
    };
    std::vector<Raw> raw;
    double mass = 0.0;
    for (int i = 0; i < kRadialNodes; ++i) {
      const double r = 0.5 * (gr.nodes[i] + 1.0);
      const double wr = 0.5 * gr.weights[i];
      for (int k = 0; k < kAngularNodes; ++k) {
        const double th = std::numbers::pi * (ga.nodes[k] + 1.0);
        const double wa = std::numbers::pi * ga.weights[k];
        const Vec2 z{r * std::cos(th), r * std::sin(th)};
        const double q = 1.0 - r * r;
        const double phi = std::exp(-1.0 / q);
        raw.push_back({z, wr * wa * r * phi, q, phi, (-2.0 / (q * q)) * z});
        mass += wr * wa * r * phi;
      }
    }
    // Hessian of exp(f), f = -1/q: phi (g g^T + Hess f), Hess f = -2 I/q^2 - 8 z z^T / q^3.
    auto diag_parts = [](const Raw& n, double zi, double gi) {
      const double q3 = n.q * n.q * n.q;
      return std::pair{n.w * (-2.0 / (n.q * n.q)), n.w * (gi * gi - 8.0 * zi * zi / q3)};
    };
    double gx = 0, gy = 0, mxy = 0;
    std::array<std::array<double, 4>, 3> ax{}, ay{};
    for (const auto& n : raw) {
      gx += n.w * n.g.x * n.z.x;
      gy += n.w * n.g.y * n.z.y;
      mxy += n.w * (n.g.x * n.g.y - 8.0 * n.z.x * n.z.y / (n.q * n.q * n.q)) * n.z.x * n.z.y;
      const auto [ax0, bx0] = diag_parts(n, n.z.x, n.g.x);
      const auto [ay0, by0] = diag_parts(n, n.z.y, n.g.y);
      const double mom[3] = {1.0, n.z.x * n.z.x, n.z.y * n.z.y};
      for (int r = 0; r < 3; ++r) {
        ax[r][0] += ax0 * mom[r];
        ax[r][1] += bx0 * mom[r];
        ax[r][2] += n.w * mom[r];
        ay[r][0] += ay0 * mom[r];
        ay[r][1] += by0 * mom[r];
        ay[r][2] += n.w * mom[r];
      }
    }
    ax[0][3] = 0, ax[1][3] = 2 * mass, ax[2][3] = 0;
    ay[0][3] = 0, ay[1][3] = 0, ay[2][3] = 2 * mass;
    const double cx[3] = {solve3(ax, 0), solve3(ax, 1), solve3(ax, 2)};
    const double cy[3] = {solve3(ay, 0), solve3(ay, 1), solve3(ay, 2)};
    std::vector<KernelNode> nodes;
    nodes.reserve(raw.size());
    for (const auto& n : raw) {
      const auto [ax0, bx0] = diag_parts(n, n.z.x, n.g.x);
      const auto [ay0, by0] = diag_parts(n, n.z.y, n.g.y);
      const double hxy = n.w * (n.g.x * n.g.y - 8.0 * n.z.x * n.z.y / (n.q * n.q * n.q));
      nodes.push_back({n.z, n.w / mass, Vec2{-n.w * n.g.x / gx, -n.w * n.g.y / gy},
                       (cx[0] * ax0 + cx[1] * bx0 + cx[2] * n.w) / mass, hxy / mxy,
                       (cy[0] * ay0 + cy[1] * by0 + cy[2] * n.w) / mass});
    }
    return nodes;
  }

  FieldPtr u_;
  double eps_;
  std::optional<ConvexPolygon> domain_;
  bool smooth_ = false;
};

inline FieldPtr mollify(FieldPtr u, double eps, std::optional<ConvexPolygon> domain = std::nullopt) {
  return std::make_shared<MollifiedField>(std::move(u), eps, std::move(domain));
}

// ---------------------------------------------------------------------------

/// Grayscale image as a piecewise constant field. Pixel (i, j) covers
/// [i h, (i+1) h] x [j h, (j+1) h]; row j = 0 is the bottom row.
class RasterField final : public Field {
 public:
  RasterField(int width, int height, std::vector<double> values, double pixel = 1.0)
      : w_(width), h_(height), values_(std::move(values)), px_(pixel) {
    if (w_ < 1 || h_ < 1 || values_.size() != std::size_t(w_) * h_)
      throw PreconditionError("raster_shape", "raster dimensions do not match value count");
    if (!(px_ > 0.0)) throw PreconditionError("positive_pixel", "pixel size must be > 0");
    for (double v : values_)
      if (!std::isfinite(v)) throw PreconditionError("raster_finite", "raster values must be finite");
  }

  int width() const noexcept { return w_; }
  int height() const noexcept { return h_; }
  double pixel_size() const noexcept { return px_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double at(int i, int j) const { return values_[std::size_t(j) * w_ + i]; }

  int components() const override { return 1; }
  Value eval(Point p) const override { return {at(index(p.x, 0.0, w_), index(p.y, 0.0, h_))}; }
  bool has_jets() const override { return true; }
  Jets jets(Point p) const override {
    Jets j;
    j.m = 1;
    j.c[0].value = eval(p)[0];
    return j;
  }
  Value trace_eval(Point p, Vec2 n) const override {
    return {at(index(p.x, n.x, w_), index(p.y, n.y, h_))};
  }
  std::vector<JumpSegment> singular_support() const override {
    std::vector<JumpSegment> out;
    for (int j = 0; j < h_; ++j)
      for (int i = 1; i < w_; ++i) {
        const double d = at(i, j) - at(i - 1, j);
        if (d != 0.0) out.push_back({{{i * px_, j * px_}, {i * px_, (j + 1) * px_}}, {1.0, 0.0}, Value{d}});
      }
    for (int j = 1; j < h_; ++j)
      for (int i = 0; i < w_; ++i) {
        const double d = at(i, j) - at(i, j - 1);
        if (d != 0.0) out.push_back({{{i * px_, j * px_}, {(i + 1) * px_, j * px_}}, {0.0, 1.0}, Value{d}});
      }
    return out;
  }
  std::vector<ConvexPolygon> smooth_pieces(const ConvexPolygon& poly) const override {
    const Box b = poly.bbox();
    const int i0 = index(b.lo.x, 1.0, w_), i1 = index(b.hi.x, -1.0, w_);
    const int j0 = index(b.lo.y, 1.0, h_), j1 = index(b.hi.y, -1.0, h_);
    std::vector<ConvexPolygon> out;
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        Box cell{{i * px_, j * px_}, {(i + 1) * px_, (j + 1) * px_}};
        if (i == 0) cell.lo.x = std::min(cell.lo.x, b.lo.x);
        if (j == 0) cell.lo.y = std::min(cell.lo.y, b.lo.y);
        if (i == w_ - 1) cell.hi.x = std::max(cell.hi.x, b.hi.x);
        if (j == h_ - 1) cell.hi.y = std::max(cell.hi.y, b.hi.y);
        ConvexPolygon piece = intersect(poly, ConvexPolygon::from_box(cell));
        if (!piece.empty()) out.push_back(std::move(piece));
      }
    return out;
  }

 private:
  /// Pixel index along one axis; on a pixel edge the side is chosen by `dir`.
  int index(double x, double dir, int n) const {
    const double f = x / px_;
    const double r = std::round(f);
    int i;
    if (std::abs(f - r) <= 1e-12 * std::max(1.0, std::abs(r))) i = static_cast<int>(r) - (dir < 0.0 ? 1 : 0);
    else i = static_cast<int>(std::floor(f));
    return std::clamp(i, 0, n - 1);
  }

  int w_, h_;
  std::vector<double> values_;
  double px_;
};

// ---------------------------------------------------------------------------
// Staircase construction for one-directional jump blow-ups (d = 2).

inline constexpr int kDim = 2;

/// Smallest integer N >= 1 with N > max(2^{d+1}, (d-1) 2^d) |b| (psi(1) - psi(-1)) / eps.
inline int choose_N(const Value& b, const MonotoneProfile& psi, double eps) {
  if (!(eps > 0.0)) throw PreconditionError("positive_epsilon", "epsilon must be > 0");
  const double c = std::max(std::pow(2.0, kDim + 1), (kDim - 1) * std::pow(2.0, kDim));
  const double bound = c * b.norm() * psi.variation(-1.0, 1.0) / eps;
  if (!std::isfinite(bound) || bound > 1e9) throw PreconditionError("bounded_N", "slab count would overflow");
  return std::max(1, static_cast<int>(std::floor(bound * (1.0 + 1e-12))) + 1);
}

/// Whether the shifted grid t_j = -1 + 2j/N + theta, j = 0..N, hits a jump of psi.
inline bool grid_hits_jump(const MonotoneProfile& psi, int N, double theta, double tol = 1e-9) {
  const double h = 2.0 / N;
  for (auto [t, size] : psi.jumps()) {
    const double k = (t - (-1.0 + theta)) / h;
    const double r = std::round(k);
    if (r >= 0 && r <= N && std::abs(k - r) <= tol) return true;
  }
  return false;
}

/// First candidate theta_i = i (2/N) / (J+1), i = 0..J, whose grid avoids all jumps.
inline double choose_shift(const MonotoneProfile& psi, int N) {
  if (N < 1) throw PreconditionError("positive_N", "N must be >= 1");
  const int J = static_cast<int>(psi.jumps().size());
  for (int i = 0; i <= J; ++i) {
    const double theta = i * (2.0 / N) / (J + 1);
    if (!grid_hits_jump(psi, N, theta)) return theta;
  }
  throw CheckFailure("no admissible shift found");
}

inline std::vector<double> staircase_nodes(int N, double theta) {
  std::vector<double> t(N + 1);
  for (int j = 0; j <= N; ++j) t[j] = -1.0 + 2.0 * j / N + theta;
  return t;
}

/// Continuous piecewise linear interpolant of psi at t_j = -1 + 2j/N + theta.
inline MonotoneProfile staircase(const MonotoneProfile& psi, int N, double theta) {
  if (N < 1) throw PreconditionError("positive_N", "N must be >= 1");
  if (grid_hits_jump(psi, N, theta, 1e-12))
    throw PreconditionError("continuity_points", "a partition point coincides with a jump of psi");
  auto t = staircase_nodes(N, theta);
  std::vector<double> v(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) v[j] = psi(t[j]);
  return {t, v, v};
}

/// Sum over the partition of psi(t_{j+1}) - psi(t_j).
inline double staircase_increment(const MonotoneProfile& psi, int N, double theta) {
  const auto t = staircase_nodes(N, theta);
  return psi(t.back()) - psi(t.front());
}

/// 2^d |b| / N * sum_j (psi(t_{j+1}) - psi(t_j)): bound on the L1 gap of the staircase.
inline double staircase_gap_bound(const Value& b, const MonotoneProfile& psi, int N, double theta) {
  return std::pow(2.0, kDim) * b.norm() / N * staircase_increment(psi, N, theta);
}

/// (d-1) 2^{d-1} |b| / N * sum_j (psi(t_{j+1}) - psi(t_j)): bound on slab-boundary traces.
inline double slab_trace_bound(const Value& b, const MonotoneProfile& psi, int N, double theta) {
  return (kDim - 1) * std::pow(2.0, kDim - 1) * b.norm() / N * staircase_increment(psi, N, theta);
}

/// 2^{d-1} |b| * int |psi - phi| over the partition range: the cube L1 gap.
inline double staircase_gap(const Value& b, const MonotoneProfile& psi, const MonotoneProfile& phi, int N,
                            double theta) {
  const auto t = staircase_nodes(N, theta);
  return std::pow(2.0, kDim - 1) * b.norm() * profile_l1_distance(psi, phi, t.front(), t.back());
}

/// |b| * sum_j int over the boundary of S_j of |psi - phi| on the reference
/// cube. phi interpolates psi at the t_j, so only the 2 (d-1) faces parallel
/// to n contribute.
inline double slab_trace(const Value& b, const MonotoneProfile& psi, const MonotoneProfile& phi, int N,
                         double theta) {
  const auto t = staircase_nodes(N, theta);
  return 2.0 * (kDim - 1) * std::pow(2.0, kDim - 2) * b.norm() * profile_l1_distance(psi, phi, t.front(), t.back());
}

}  // namespace bvpa
