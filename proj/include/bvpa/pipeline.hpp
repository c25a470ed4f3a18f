#pragma once

// End-to-end experiments: convergence tables on uniform meshes, the smooth
// and jump cube demos, the full assembly for a field with one straight jump,
// and the piecewise constant counterexample.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bvpa/calibration.hpp"
#include "bvpa/error.hpp"
#include "bvpa/fields.hpp"
#include "bvpa/functionals.hpp"
#include "bvpa/interp.hpp"
#include "bvpa/mesh.hpp"
#include "bvpa/piecewise_affine.hpp"
#include "bvpa/report.hpp"

namespace bvpa {

inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Convergence on uniform meshes.

struct ConvergenceRow {
  double k = 0.0;
  double grad_error = 0.0;
  double omega_3k = 0.0;
  std::optional<double> ratio;
  std::optional<double> rate;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::optional<double> fitted_rate;  ///< least-squares slope of log error against log k
};

inline constexpr double kNegligibleError = 1e-12;

inline std::optional<double> fitted_loglog_rate(const std::vector<double>& k, const std::vector<double>& e) {
  if (k.size() < 2) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (!(e[i] > kNegligibleError)) return std::nullopt;
    const double x = std::log(k[i]), y = std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(k.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline ConvergenceTable convergence_study(const FieldPtr& u, const std::vector<double>& ks,
                                          const Box& domain = {{0, 0}, {1, 1}}, const QuadratureSpec& q = {}) {
  if (ks.empty()) throw PreconditionError("nonempty_k_list", "k list is empty");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!(ks[i] > 0)) throw PreconditionError("positive_k", "mesh sizes must be > 0");
    if (i > 0 && !(ks[i] < ks[i - 1])) throw PreconditionError("decreasing_k", "k list must be decreasing");
  }
  if (!u->singular_support().empty()) throw PreconditionError("sobolev_field", "field must have no jumps");
  ConvergenceTable t;
  std::vector<double> errs;
  for (double k : ks) {
    auto mesh = std::make_shared<const Mesh>(uniform_triangulation(domain, k));
    auto a = interpolate(u, mesh, {MollifyMode::None, 0.0, std::nullopt});
    ConvergenceRow row;
    row.k = k;
    row.grad_error = gradient_error(*u, *a, q);
    row.omega_3k = modulus_grad(*u, 3 * k, domain, q);
    if (row.omega_3k > kNegligibleError) row.ratio = row.grad_error / row.omega_3k;
    if (!t.rows.empty()) {
      const auto& prev = t.rows.back();
      if (prev.grad_error > kNegligibleError && row.grad_error > kNegligibleError)
        row.rate = std::log(prev.grad_error / row.grad_error) / std::log(prev.k / k);
    }
    errs.push_back(row.grad_error);
    t.rows.push_back(row);
  }
  t.fitted_rate = fitted_loglog_rate(ks, errs);
  return t;
}

inline std::string to_csv(const ConvergenceTable& t) {
  std::ostringstream os;
  os << "k,grad_error,omega_3k,ratio,rate\n";
  auto opt = [](const std::optional<double>& x) { return x ? format_number(*x) : std::string("NA"); };
  for (const auto& r : t.rows)
    os << format_number(r.k) << ',' << format_number(r.grad_error) << ',' << format_number(r.omega_3k) << ','
       << opt(r.ratio) << ',' << opt(r.rate) << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Smooth cube demo.

inline void require_cube_in(const RotatedRect& cube, const Box& domain) {
  for (Point p : cube.corners())
    if (!(p.x > domain.lo.x && p.x < domain.hi.x && p.y > domain.lo.y && p.y < domain.hi.y))
      throw PreconditionError("cube_in_domain", "cube is not contained in the domain");
}

/// Compares u with its first-order Taylor polynomial w at x0 on the cubes of
/// half side r.
inline Report smooth_cube_demo(const FieldPtr& u, Point x0, const std::vector<double>& rs, double eps,
                               const Box& domain = {{0, 0}, {1, 1}}, const QuadratureSpec& q = {}) {
  if (!(eps > 0)) throw PreconditionError("positive_epsilon", "epsilon must be > 0");
  const Jets j = u->jets(x0);
  AffineMap t(j.gradient(), j.value());
  for (int i = 0; i < t.components(); ++i) t.offset[i] -= dot(t.linear.rows[i], x0);
  const AffineField w(t);

  Report rep;
  rep.kind = "smooth_cube";
  rep.set("epsilon", eps);
  std::vector<double> sorted = rs;
  std::sort(sorted.begin(), sorted.end());
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  std::optional<double> threshold;
  bool prefix_ok = true;
  for (double r : sorted) {
    const RotatedRect cube(x0, {1, 0}, r, r);
    require_cube_in(cube, domain);
    const Region Q{ConvexPolygon(cube)};
    const double vol = cube.measure();
    const double l1 = l1_distance(*u, w, Q, q);
    const double ag = std::abs(area_functional(*u, Q, q).total - area_functional(w, Q, q).total);
    const double bd = boundary_gap(*u, w, ConvexPolygon(cube), q);
    const std::string tag = "r=" + format_number(r) + ":";
    rep.add(Check::make(tag + "l1", l1, eps * r * vol));
    rep.add(Check::make(tag + "area_gap", ag, eps * vol));
    rep.add(Check::make(tag + "boundary", bd, eps * vol));
    const bool ok = l1 < eps * r * vol && ag < eps * vol && bd < eps * vol;
    prefix_ok = prefix_ok && ok;
    if (prefix_ok) threshold = r;
    rows.push_back({{"r", r}, {"l1", l1}, {"area_gap", ag}, {"boundary", bd}, {"pass", ok}});
  }
  rep.set("threshold_found", threshold ? 1.0 : 0.0);
  rep.set("threshold_r", threshold.value_or(0.0));
  rep.extra["rows"] = rows;
  return rep;
}

// ---------------------------------------------------------------------------
// Jump cube demo.

struct JumpCubeSpec {
  Value b{1.0};
  Vec2 n{1, 0};
  MonotoneProfile psi = MonotoneProfile::heaviside(0.0);
  Point x0{0.5, 0.5};
  double r = 0.25;
  FieldPtr smooth;  ///< optional smooth part added to the jump field
  Box domain{{0, 0}, {1, 1}};
};

struct JumpCube {
  Report report;
  int N = 0;
  double theta = 0.0;
  RotatedRect cube{{0, 0}, {1, 0}, 1, 1};
  std::shared_ptr<const Mesh> slabs;
  std::shared_ptr<PiecewiseAffineField> w;
  FieldPtr u;
};

namespace detail {

/// w = b phi(((x - x0)/r) . n) on each slab, plus an affine part.
inline std::shared_ptr<PiecewiseAffineField> staircase_field(const Value& b, Vec2 n, const MonotoneProfile& phi,
                                                             Point x0, double r, int N, double theta,
                                                             std::shared_ptr<const Mesh> slabs,
                                                             const std::optional<AffineMap>& extra) {
  const auto t = staircase_nodes(N, theta);
  std::vector<AffineMap> maps;
  const double s0 = dot(x0, n) / r;
  for (int j = 0; j < N; ++j) {
    const double pj = phi(t[j]);
    const double slope = (phi(t[j + 1]) - pj) / (t[j + 1] - t[j]);
    AffineMap a(Jacobian(b.size()), Value(b.size()));
    for (int i = 0; i < b.size(); ++i) {
      a.linear.rows[i] = (b[i] * slope / r) * n;
      a.offset[i] = b[i] * (pj - slope * (t[j] + s0));
    }
    if (extra) a = a + *extra;
    maps.push_back(a);
  }
  return std::make_shared<PiecewiseAffineField>(std::move(slabs), std::move(maps));
}

inline std::shared_ptr<const Mesh> slab_mesh(const std::vector<RotatedRect>& slabs) {
  auto m = std::make_shared<Mesh>();
  for (const auto& s : slabs) m->add(s, CellRole::Slab);
  return m;
}

}  // namespace detail

/// Staircase approximation on the jump cube with axis n, shifted by r theta n.
inline JumpCube jump_cube(const JumpCubeSpec& spec, double eps, const QuadratureSpec& q = {}) {
  if (!(spec.r > 0)) throw PreconditionError("positive_radius", "cube half side must be > 0");
  JumpCube out;
  out.N = choose_N(spec.b, spec.psi, eps);
  out.theta = choose_shift(spec.psi, out.N);
  const MonotoneProfile phi = staircase(spec.psi, out.N, out.theta);
  const RotatedRect cube0(spec.x0, spec.n, spec.r, spec.r);
  out.cube = RotatedRect(spec.x0 + (spec.r * out.theta) * spec.n, spec.n, spec.r, spec.r);
  require_cube_in(out.cube, spec.domain);
  out.slabs = detail::slab_mesh(slab_decomposition(cube0, spec.n, out.N, out.theta));

  FieldPtr jump = std::make_shared<JumpField>(spec.b, spec.n, spec.psi, spec.x0, spec.r);
  std::optional<AffineMap> taylor;
  if (spec.smooth) {
    if (spec.smooth->components() != spec.b.size())
      throw PreconditionError("components", "smooth part and amplitude differ in dimension");
    const Point c = out.cube.center();
    const Jets j = spec.smooth->jets(c);
    AffineMap t(j.gradient(), j.value());
    for (int i = 0; i < t.components(); ++i) t.offset[i] -= dot(t.linear.rows[i], c);
    taylor = t;
    out.u = std::make_shared<SumField>(spec.smooth, jump);
  } else {
    out.u = jump;
  }
  out.w = detail::staircase_field(spec.b, spec.n, phi, spec.x0, spec.r, out.N, out.theta, out.slabs, taylor);

  Report& rep = out.report;
  rep.kind = "jump_cube";
  const Region Q{ConvexPolygon(out.cube)};
  const double vol = out.cube.measure();
  const double tv = total_variation(*out.u, Q, q).total;
  const double au = area_functional(*out.u, Q, q).total;
  const double aw = area_functional(*out.w, Q, q).total;
  const double l1 = l1_distance(*out.u, *out.w, Q, q);
  const double slab_trace = trace_gap(*out.u, *out.w, *out.slabs, q);
  rep.set("epsilon", eps);
  rep.set("N", out.N);
  rep.set("theta", out.theta);
  rep.set("r", spec.r);
  rep.set("tv_u", tv);
  rep.set("area_u", au);
  rep.set("area_w", aw);
  rep.add(Check::make("l1", l1, eps * spec.r * tv));
  rep.add(Check::make("area_gap", std::abs(au - aw), eps * au + 2 * vol));
  rep.add(Check::make("slab_trace", slab_trace, eps * tv));

  // Reference-cube quantities and their closed-form bounds.
  const double gap = staircase_gap(spec.b, spec.psi, phi, out.N, out.theta);
  const double gap_bound = staircase_gap_bound(spec.b, spec.psi, out.N, out.theta);
  rep.add(Check::make("phi_psi_gap", gap, gap_bound, false));
  rep.add(Check::make("phi_psi_bound", gap_bound, eps / 2));
  const RotatedRect unit0({0, 0}, spec.n, 1, 1);
  auto unit_slabs = detail::slab_mesh(slab_decomposition(unit0, spec.n, out.N, out.theta));
  const JumpField u0(spec.b, spec.n, spec.psi, {0, 0}, 1.0);
  auto w0 = detail::staircase_field(spec.b, spec.n, phi, {0, 0}, 1.0, out.N, out.theta, unit_slabs, std::nullopt);
  const double unit_trace = trace_gap(u0, *w0, *unit_slabs, q);
  rep.add(Check::make("unit_slab_trace", unit_trace, slab_trace_bound(spec.b, spec.psi, out.N, out.theta), false));
  return out;
}

inline Report jump_cube_demo(const JumpCubeSpec& spec, double eps, const QuadratureSpec& q = {}) {
  return jump_cube(spec, eps, q).report;
}

// ---------------------------------------------------------------------------
// Full assembly for a smooth field plus one straight axis-parallel jump.

struct FullOptions {
  int cubes = 2;           ///< jump cubes stacked along the jump line
  int depth = 3;           ///< annulus layers
  double k_background = 0.0;  ///< 0: half the outer cube half side
  double k_smooth = 0.05;     ///< mesh size when u has no jump
};

struct FullApproximation {
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<PiecewiseAffineField> v;
  Report report;
};

namespace detail {

struct ModelSplit {
  FieldPtr smooth;
  std::shared_ptr<const JumpField> jump;
};

inline ModelSplit split_model_field(const FieldPtr& u) {
  if (auto j = std::dynamic_pointer_cast<const JumpField>(u)) return {nullptr, j};
  if (auto s = std::dynamic_pointer_cast<const SumField>(u)) {
    auto a = std::dynamic_pointer_cast<const JumpField>(s->first());
    auto b = std::dynamic_pointer_cast<const JumpField>(s->second());
    if (b && s->first()->singular_support().empty()) return {s->first(), b};
    if (a && s->second()->singular_support().empty()) return {s->second(), a};
    throw PreconditionError("one_jump_field", "field must be a smooth part plus one jump field");
  }
  if (!u->singular_support().empty())
    throw PreconditionError("one_jump_field", "field must be a smooth part plus one jump field");
  return {u, nullptr};
}

/// Mollified Lagrange interpolation on a background mesh; vertices on the
/// domain boundary take u's trace.
inline std::vector<AffineMap> background_maps(const FieldPtr& u, const Mesh& mesh, const ConvexPolygon& omega) {
  const double tol = 1e-12 * omega.diam();
  std::vector<AffineMap> maps;
  for (const auto& c : mesh.cells()) {
    const Simplex& s = std::get<Simplex>(c.shape);
    const MollifiedField f(u, s.diam(), omega);
    std::array<Value, 3> vals;
    for (int i = 0; i < 3; ++i)
      vals[i] = distance_to_boundary(omega, s[i]) <= tol ? u->trace_eval(s[i], s.centroid() - s[i]) : f.eval(s[i]);
    maps.push_back(affine_from_vertex_values(s, vals));
  }
  return maps;
}

inline double boundary_trace_gap(const Field& u, const PiecewiseAffineField& v, const ConvexPolygon& omega,
                                 const QuadratureSpec& q) {
  const double tol = 1e-12 * omega.diam();
  const CutSet cuts({&u}, q.split_jumps);
  double total = 0.0;
  auto on = [&](Point p) { return distance_to_boundary(omega, p) <= tol; };
  for (const auto& c : v.mesh().cells()) {
    const ConvexPolygon poly = polygon(c.shape);
    const Point ctr = poly.centroid();
    for (const Segment& e : poly.edges()) {
      if (!(on(e.a) && on(e.b) && on(e.midpoint()))) continue;
      const auto t = cuts.cuts(e);
      for (std::size_t k = 0; k + 1 < t.size(); ++k)
        total += integrate_segment({e.at(t[k]), e.at(t[k + 1])}, q.edge_nodes, [&](Point p) {
          return (u.trace_eval(p, ctr - p) - v.map(c.id)(p)).norm();
        });
    }
  }
  return total;
}

}  // namespace detail

inline FullApproximation full_approximation(const FieldPtr& u, double eps, const FullOptions& opt = {},
                                            const QuadratureSpec& q = {}) {
  if (!(eps > 0)) throw PreconditionError("positive_epsilon", "epsilon must be > 0");
  const Box omega_box{{0, 0}, {1, 1}};
  const ConvexPolygon omega = ConvexPolygon::from_box(omega_box);
  const auto split = detail::split_model_field(u);

  auto mesh = std::make_shared<Mesh>();
  std::vector<AffineMap> maps;
  std::vector<Report> cube_reports;
  double strip_area = 0.0;
  int N = 0;

  if (!split.jump) {
    const Mesh bg = uniform_triangulation(omega_box, opt.k_smooth, CellRole::Background);
    for (auto& a : detail::background_maps(u, bg, omega)) maps.push_back(a);
    mesh->append(bg);
  } else {
    const JumpField& J = *split.jump;
    const Vec2 n = J.direction();
    const bool vertical = std::abs(std::abs(n.x) - 1.0) <= 1e-12;
    const bool horizontal = std::abs(std::abs(n.y) - 1.0) <= 1e-12;
    if (!vertical && !horizontal) throw PreconditionError("axis_parallel_jump", "jump line must be axis parallel");
    const auto jumps = J.profile().jumps();
    if (jumps.size() != 1) throw PreconditionError("one_jump", "profile must have exactly one jump");
    // Jump line: x . n = level.
    const double level = dot(J.center(), n) + J.scale() * jumps.front().first;
    const double sign = vertical ? n.x : n.y;
    const double c = level * sign;  // coordinate of the line along its normal axis
    if (!(c > 0.0 && c < 1.0)) throw PreconditionError("jump_crosses_domain", "jump line must cross the square");
    const int M = std::max(1, opt.cubes);
    const double s = 1.0 / (2.0 * M);
    const Vec2 tangent = vertical ? Vec2{0, 1} : Vec2{1, 0};
    const Vec2 axis = vertical ? Vec2{1, 0} : Vec2{0, 1};

    // Local profile in each cube: psi_i(t) = Psi(((x_i - center) . n + r t) / scale).
    auto local_profile = [&](double r) {
      return J.profile().reparametrized(jumps.front().first, r / J.scale());
    };
    N = choose_N(J.amplitude(), local_profile(s), eps);  // N depends on r only through psi's shape
    double r = s / (1.0 + 2.0 / N);
    for (int it = 0; it < 8; ++it) {
      const int n2 = choose_N(J.amplitude(), local_profile(r), eps);
      if (n2 == N) break;
      N = n2;
      r = s / (1.0 + 2.0 / N);
    }
    const double eta = 2.0 * r / N;
    const MonotoneProfile psi = local_profile(r);
    const double theta = choose_shift(psi, N);
    const double shifted = c + r * theta * sign;  // line coordinate of the cube centres
    if (!(shifted - s > 0.0 && shifted + s < 1.0))
      throw PreconditionError("strip_in_domain", "jump strip does not fit inside the square");

    for (int i = 0; i < M; ++i) {
      const double along = (2 * i + 1) * s;
      const Point xi = vertical ? Point{c, along} : Point{along, c};
      JumpCubeSpec spec;
      spec.b = J.amplitude();
      spec.n = n;
      spec.psi = psi;
      spec.x0 = xi;
      spec.r = r;
      spec.smooth = split.smooth;
      spec.domain = Box{{-1, -1}, {2, 2}};  // cube containment is checked through the strip
      JumpCube cube = jump_cube(spec, eps, q);
      if (cube.N != N) throw CheckFailure("jump cube slab count disagrees with the strip");
      const RotatedRect Q(cube.cube.center(), n, r + eta, r + eta);
      FieldPtr ui = cube.u;
      auto ec = element_construction(ui, Q, cube.cube, *cube.w, opt.depth, q, false);
      for (const auto& cell : cube.slabs->cells()) {
        mesh->add(cell.shape, cell.role);
        maps.push_back(cube.w->map(cell.id));
      }
      for (const auto& cell : ec.mesh->cells()) {
        mesh->add(cell.shape, cell.role);
        maps.push_back(ec.v->map(cell.id));
      }
      strip_area += Q.measure();
      Report cr = cube.report;
      cr.kind = "cube" + std::to_string(i);
      cube_reports.push_back(std::move(cr));
      (void)tangent;
    }

    // Background: the square minus the strip of outer cubes.
    const double lo = shifted - s, hi = shifted + s;
    const double kb = opt.k_background > 0 ? opt.k_background : s / 2;
    std::vector<Box> parts;
    if (vertical) {
      parts.push_back({{0, 0}, {lo, 1}});
      parts.push_back({{hi, 0}, {1, 1}});
    } else {
      parts.push_back({{0, 0}, {1, lo}});
      parts.push_back({{0, hi}, {1, 1}});
    }
    for (const Box& b : parts) {
      if (!(b.width() > 1e-12 && b.height() > 1e-12)) continue;
      const Mesh bg = uniform_triangulation(b, kb, CellRole::Background);
      for (auto& a : detail::background_maps(u, bg, omega)) maps.push_back(a);
      mesh->append(bg);
    }
    (void)axis;
  }

  FullApproximation out;
  out.mesh = mesh;
  out.v = std::make_shared<PiecewiseAffineField>(mesh, std::move(maps));
  const PiecewiseAffineField& v = *out.v;

  Report& rep = out.report;
  rep.kind = "full_approximation";
  const Region Om(omega);
  const double area = omega.area();
  const double tv_u = total_variation(*u, Om, q).total;
  const double au = area_functional(*u, Om, q).total;
  const double av = area_functional(v, Om, q).total;
  const double l1 = l1_distance(*u, v, Om, q);
  const double overlap = max_relative_overlap(*mesh);
  const double residual = mesh->area(CellRole::Residual) + std::max(0.0, area - mesh->area());
  const double traces = trace_gap(*u, v, *mesh, q);
  const double boundary = detail::boundary_trace_gap(*u, v, omega, q);
  rep.set("epsilon", eps);
  rep.set("N", N);
  rep.set("cells", mesh->size());
  rep.set("tv_u", tv_u);
  rep.set("area_u", au);
  rep.set("area_v", av);
  rep.set("l1_gap", l1);
  rep.set("area_gap", std::abs(au - av));
  rep.set("jump_cube_area", strip_area);
  rep.set("residual_measure", residual);
  rep.set("trace_constant", kTraceConstant);
  rep.add(Check::make("overlap", overlap, 1e-12));
  rep.add(Check::make("residual", residual, 0.01 * area));
  rep.add(Check::make("strict_gap", l1 + std::abs(au - av), eps * (area + au)));
  rep.add(Check::make("trace_gap", traces, eps * (1 + kTraceConstant) * (area + tv_u)));
  rep.add(Check::make("boundary_trace", boundary, 1e-6));
  nlohmann::ordered_json cubes = nlohmann::ordered_json::array();
  for (const auto& r : cube_reports) cubes.push_back(to_json(r));
  rep.extra["cubes"] = cubes;
  return out;
}

/// Jump cube data for a smooth field plus one jump field, on the cube of half
/// side r centred at x0.
inline JumpCubeSpec jump_cube_spec(const FieldPtr& u, Point x0, double r, const Box& domain = {{0, 0}, {1, 1}}) {
  if (!(r > 0)) throw PreconditionError("positive_radius", "cube half side must be > 0");
  const auto split = detail::split_model_field(u);
  if (!split.jump) throw PreconditionError("one_jump_field", "field has no jump part");
  const JumpField& J = *split.jump;
  JumpCubeSpec spec;
  spec.b = J.amplitude();
  spec.n = J.direction();
  spec.psi = J.profile().reparametrized(J.coordinate(x0), r / J.scale());
  spec.x0 = x0;
  spec.r = r;
  spec.smooth = split.smooth;
  spec.domain = domain;
  return spec;
}

/// Heaviside jump across the vertical line x = 1/2.
inline FieldPtr standard_jump_field() {
  return std::make_shared<JumpField>(Value{1.0}, Vec2{1, 0}, MonotoneProfile::heaviside(0.0), Point{0.5, 0.5}, 1.0);
}

// ---------------------------------------------------------------------------
// Piecewise constant approximants of the identity map.

inline std::shared_ptr<PiecewiseAffineField> pixel_staircase_identity(int n) {
  if (n < 1) throw PreconditionError("positive_level", "staircase level must be >= 1");
  auto mesh = std::make_shared<Mesh>();
  std::vector<AffineMap> maps;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Point lo{double(i) / n, double(j) / n}, hi{double(i + 1) / n, double(j + 1) / n};
      mesh->add(RotatedRect::axis_aligned(lo, hi));
      maps.push_back(AffineMap::constant(Value{(i + 0.5) / n, (j + 0.5) / n}));
    }
  return std::make_shared<PiecewiseAffineField>(mesh, std::move(maps));
}

inline constexpr double kStaircaseTvLimit = 2.0;

inline Report no_constant_demo(const std::vector<int>& levels = {4, 8, 16, 32, 64}, const QuadratureSpec& q = {}) {
  if (levels.empty()) throw PreconditionError("nonempty_levels", "no staircase levels given");
  const auto u = ExprField::from_text({"x", "y"});
  const Region Om = unit_square();
  const Integrand F = det_sqrt_integrand();
  Report rep;
  rep.kind = "no_constant";
  const double fu = f_mass(*u, Om, F, q).total;
  const double tv_u = total_variation(*u, Om, q).total;
  rep.set("fmass_identity", fu);
  rep.set("tv_identity", tv_u);
  double worst_mass = 0.0, tv_last = 0.0, fm_last = 0.0;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int n : levels) {
    const auto uj = pixel_staircase_identity(n);
    const double l1 = l1_distance(*u, *uj, Om, q);
    const double tv = total_variation(*uj, Om, q).total;
    const double fm = f_mass(*uj, Om, F, q).total;
    worst_mass = std::max(worst_mass, std::abs(fm));
    tv_last = tv;
    fm_last = fm;
    rows.push_back({{"n", n}, {"l1", l1}, {"tv", tv}, {"fmass", fm}});
  }
  rep.set("tv_staircase_limit", kStaircaseTvLimit);
  rep.set("tv_finest", tv_last);
  rep.set("tv_persistent_gap", kStaircaseTvLimit - tv_u);
  rep.set("gap", fu - fm_last);
  rep.add(Check::make("fmass_piecewise_constant", worst_mass, 0.0, false));
  rep.add(Check::make("fmass_identity", std::abs(fu - 1.0), 1e-10));
  rep.add(Check::make("tv_finest", std::abs(tv_last - kStaircaseTvLimit) / kStaircaseTvLimit, 0.05));
  rep.extra["levels"] = rows;
  return rep;
}

// ---------------------------------------------------------------------------
// Corpora for the fitted constants.

/// A random C^2 expression: trigonometric, exponential and cubic terms with
/// random coefficients.
inline std::string random_c2_expression(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  std::uniform_int_distribution<int> pick(0, 3);
  auto num = [&](double x) { return format_number(std::round(x * 1000) / 1000); };
  auto coef = [&] {
    double c = U(rng);
    if (std::abs(c) < 0.1) c = 0.5;
    return c;
  };
  std::string e;
  auto add = [&](const std::string& term) { e += (e.empty() ? "" : " + ") + term; };
  const int terms = 2 + pick(rng) % 2;
  for (int t = 0; t < terms; ++t) {
    switch (pick(rng)) {
      case 0: add("(" + num(coef()) + ")*sin(" + num(coef()) + "*x + " + num(coef()) + "*y)"); break;
      case 1: add("(" + num(coef()) + ")*exp(" + num(0.5 * coef()) + "*x)*cos(" + num(coef()) + "*y)"); break;
      case 2: add("(" + num(coef()) + ")*x^2*y + (" + num(coef()) + ")*y^3"); break;
      default: add("(" + num(coef()) + ")*x^2 + (" + num(coef()) + ")*x*y + (" + num(coef()) + ")*y^2"); break;
    }
  }
  return e;
}

/// A random triangle in the unit square with area >= 0.05 diam^2.
inline Simplex random_simplex(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (;;) {
    const Point a{U(rng), U(rng)}, b{U(rng), U(rng)}, c{U(rng), U(rng)};
    const double area = 0.5 * std::abs(cross(b - a, c - a));
    const double d = std::max({distance(a, b), distance(b, c), distance(c, a)});
    if (d > 0.05 && area >= 0.05 * d * d) return Simplex(a, b, c);
  }
}

struct InterpolationSample {
  std::string expr;
  double ratio = 0.0;      ///< gradient error / (diam^2 * vertex-weighted Hessian)
  double raw_ratio = 0.0;  ///< gradient error / inf_z int over tau+B of |grad u - z|
};

inline double simplex_gradient_error(const Field& f, const Simplex& s, const QuadratureSpec& q = {}) {
  const AffineMap a = lagrange_simplex(f, s);
  return integrate_polygon(ConvexPolygon(s), q.levels, [&](Point p) { return (f.gradient(p) - a.linear).frobenius(); });
}

/// The simplex inflated by its diameter, as a polygon with 64 arc points per vertex.
inline ConvexPolygon inflated_simplex(const Simplex& s) {
  std::vector<Point> pts;
  const double r = s.diam();
  for (Point v : s.vertices())
    for (int k = 0; k < 64; ++k) pts.push_back(v + r * unit_from_angle(2 * std::numbers::pi * k / 64));
  return convex_hull(std::move(pts));
}

inline InterpolationSample interpolation_sample(const std::string& text, const Simplex& s,
                                                const QuadratureSpec& q = {}) {
  const auto f = ExprField::from_text({text});
  InterpolationSample out;
  out.expr = text;
  const double err = simplex_gradient_error(*f, s, q);
  const double d = s.diam();
  out.ratio = err / (d * d * hessian_weighted(*f, s));
  const ConvexPolygon big = inflated_simplex(s);
  const double A = big.area();
  Jacobian mean(1);
  mean.rows[0] = {integrate_polygon(big, q.levels, [&](Point p) { return f->gradient(p).rows[0].x; }) / A,
                  integrate_polygon(big, q.levels, [&](Point p) { return f->gradient(p).rows[0].y; }) / A};
  double best = std::numeric_limits<double>::infinity();
  for (const Jacobian& z : {Jacobian(1), mean})
    best = std::min(best, integrate_polygon(big, q.levels, [&](Point p) { return (f->gradient(p) - z).frobenius(); }));
  out.raw_ratio = err / best;
  return out;
}

inline std::vector<InterpolationSample> interpolation_corpus(std::uint64_t seed, int count = 200,
                                                             const QuadratureSpec& q = {}) {
  std::mt19937_64 rng(seed);
  std::vector<InterpolationSample> out;
  while (static_cast<int>(out.size()) < count) {
    const std::string e = random_c2_expression(rng);
    const Simplex s = random_simplex(rng);
    out.push_back(interpolation_sample(e, s, q));
  }
  return out;
}

struct SobolevCorpusField {
  std::string expr;
  bool c2 = false;
};

inline std::vector<SobolevCorpusField> sobolev_corpus() {
  return {{"sin(pi*x)*sin(pi*y)", true},
          {"exp(x)*cos(2*y)", true},
          {"x^3 - 2*x*y^2 + y", true},
          {"abs(x - 0.5)*y", false},
          {"sqrt((x - 0.3)^2 + (y - 0.6)^2)", false}};
}

inline const std::vector<double>& corpus_mesh_sizes() {
  static const std::vector<double> k{0.4, 0.2, 0.1, 0.05};
  return k;
}

/// Largest gradient-error / omega(3k) ratio over the corpus and mesh sizes.
inline double sobolev_corpus_max_ratio(const QuadratureSpec& q = {}) {
  double worst = 0.0;
  for (const auto& f : sobolev_corpus()) {
    const auto t = convergence_study(ExprField::from_text({f.expr}), corpus_mesh_sizes(), {{0, 0}, {1, 1}}, q);
    for (const auto& r : t.rows)
      if (r.ratio) worst = std::max(worst, *r.ratio);
  }
  return worst;
}

/// Largest cell-trace ratio sum_tau int |u - v| / |Du|(A) of the annulus
/// construction around Heaviside jump cubes.
inline double annulus_trace_ratio_max(const std::vector<double>& eps_list = {0.4, 0.2, 0.1},
                                      const std::vector<int>& depths = {2, 3, 4}, const QuadratureSpec& q = {}) {
  double worst = 0.0;
  for (double eps : eps_list) {
    JumpCubeSpec spec;
    spec.r = 0.2;
    spec.x0 = {0.5, 0.5};
    JumpCube cube = jump_cube(spec, eps, q);
    const double eta = 2 * spec.r / cube.N;
    const RotatedRect Q(cube.cube.center(), spec.n, spec.r + eta, spec.r + eta);
    for (int L : depths) {
      auto ec = element_construction(cube.u, Q, cube.cube, *cube.w, L, q);
      worst = std::max(worst, ec.report.trace_ratio);
    }
  }
  return worst;
}

}  // namespace bvpa
