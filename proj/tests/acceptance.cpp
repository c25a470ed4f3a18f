// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero if
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bvpa/bvpa.hpp"

namespace fs = std::filesystem;
using namespace bvpa;

namespace {

constexpr double kAffineTol = 1e-10;
constexpr double kIdentitySlack = 1e-10;
constexpr double kRotationRelTol = 1e-8;
constexpr double kRateLo = 0.8, kRateHi = 1.2;

std::string num(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4g", x);
  return b;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// 1 ------------------------------------------------------------------------

Outcome affine_reproduction() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0), P(0.0, 1.0);
  double worst_grad = 0.0, worst_trace = 0.0;
  int cells = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + trial % 2;
    std::vector<std::string> exprs;
    for (int i = 0; i < m; ++i)
      exprs.push_back(format_number(U(rng)) + " + (" + format_number(U(rng)) + ")*x + (" + format_number(U(rng)) + ")*y");
    const FieldPtr u = ExprField::from_text(exprs);
    Mesh mesh;
    if (trial % 2 == 0) {
      const Point lo{U(rng), U(rng)};
      const Box box{lo, lo + Vec2{0.5 + 1.5 * P(rng), 0.5 + 1.5 * P(rng)}};
      mesh = uniform_triangulation(box, 0.05 + 0.25 * P(rng));
    } else {
      const Point c{P(rng), P(rng)};
      const Vec2 axis = unit_from_angle(2 * std::numbers::pi * P(rng));
      const double h = 0.2 + 0.8 * P(rng);
      const int k = 4 + static_cast<int>(P(rng) * 36);
      const double h0 = k * h / (k + 4);
      mesh = whitney_annulus({c, axis, h, h}, {c, axis, h0, h0}, 2 + trial % 3);
    }
    cells += mesh.size();
    const auto a = interpolate(u, mesh);
    worst_grad = std::max(worst_grad, gradient_error(*u, *a));
    worst_trace = std::max(worst_trace, trace_gap(*u, *a, a->mesh()));
  }
  return {worst_grad < kAffineTol && worst_trace < kAffineTol,
          "max grad error " + num(worst_grad) + ", max trace gap " + num(worst_trace) + " (< " + num(kAffineTol) +
              ", 100 fields, " + std::to_string(cells) + " cells)"};
}

// 2 ------------------------------------------------------------------------

Outcome interpolation_constant() {
  double worst = 0.0;
  for (const auto& s : interpolation_corpus(2, 200)) worst = std::max(worst, s.ratio);
  const double bound = kHeadroom * kInterpolationConstant;
  return {worst <= bound, "max ratio " + num(worst) + " <= " + num(bound) + " (stored " + num(kInterpolationConstant) +
                              " x " + num(kHeadroom) + ", 200 pairs, seed 2)"};
}

// 3 ------------------------------------------------------------------------

Outcome modulus_bound() {
  bool ok = true;
  double worst = 0.0, rate_lo = 1e300, rate_hi = -1e300;
  for (const auto& f : sobolev_corpus()) {
    const auto t = convergence_study(ExprField::from_text({f.expr}), corpus_mesh_sizes());
    for (const auto& r : t.rows) {
      const double bound = kHeadroom * kModulusConstant * r.omega_3k;
      ok = ok && r.grad_error <= bound;
      if (r.omega_3k > 0) worst = std::max(worst, r.grad_error / r.omega_3k);
    }
    if (f.c2) {
      const double rate = t.fitted_rate.value_or(0.0);
      rate_lo = std::min(rate_lo, rate);
      rate_hi = std::max(rate_hi, rate);
      ok = ok && rate >= kRateLo && rate <= kRateHi;
    }
  }
  return {ok, "max error/omega(3k) " + num(worst) + " <= " + num(kHeadroom * kModulusConstant) +
                  "; C2 fitted rates in [" + num(rate_lo) + ", " + num(rate_hi) + "]"};
}

// 4 ------------------------------------------------------------------------

MonotoneProfile random_profile(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int n = 2 + static_cast<int>(U(rng) * 4);
  std::vector<double> t, left, right;
  double x = -1.5, v = -1.0 + U(rng);
  for (int i = 0; i < n; ++i) {
    x += 0.1 + U(rng) * (3.0 / n);
    t.push_back(x);
    v += i == 0 ? 0.0 : U(rng) * 0.8;  // ramp between breakpoints
    left.push_back(v);
    if (U(rng) < 0.6) v += 0.1 + U(rng);  // jump
    right.push_back(v);
  }
  return {t, left, right};
}

Outcome staircase_bounds() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  bool ok = true;
  double worst_gap = 0.0, worst_trace = 0.0, worst_quad = 0.0;
  for (int i = 0; i < 50; ++i) {
    const MonotoneProfile psi = random_profile(rng);
    const Value b{U(rng) * 2 - 1, U(rng) * 2 - 1};
    const double eps = 0.05 + 0.25 * U(rng);
    const int N = choose_N(b, psi, eps);
    const double theta = choose_shift(psi, N);
    const MonotoneProfile phi = staircase(psi, N, theta);
    const double gap = staircase_gap(b, psi, phi, N, theta);
    const double gap_bound = staircase_gap_bound(b, psi, N, theta);
    const double tr = slab_trace(b, psi, phi, N, theta);
    const double tr_bound = slab_trace_bound(b, psi, N, theta);
    ok = ok && gap <= gap_bound && gap_bound < eps / 2 && tr <= tr_bound && tr_bound < eps / 2;
    worst_gap = std::max(worst_gap, gap / gap_bound);
    worst_trace = std::max(worst_trace, tr / tr_bound);
    if (i < 10) {
      // Cross-check the closed form against mesh quadrature on the slabs.
      JumpCubeSpec spec;
      spec.b = b;
      spec.psi = psi;
      spec.r = 1.0;
      spec.x0 = {0, 0};
      spec.domain = {{-3, -3}, {3, 3}};
      const double q = jump_cube(spec, eps).report.check("unit_slab_trace").measured;
      worst_quad = std::max(worst_quad, std::abs(q - tr) / std::max(tr, 1e-300));
    }
  }
  return {ok, "max gap/bound " + num(worst_gap) + ", max slab trace/bound " + num(worst_trace) +
                  " (50 profiles, exact); quadrature vs closed form rel. diff " + num(worst_quad)};
}

// 5 ------------------------------------------------------------------------

Outcome jump_cube_criterion() {
  JumpCubeSpec spec;  // Heaviside, b = 1, unit normal e1, cube of half side 1/4 at the centre
  const auto a = jump_cube(spec, 0.1);
  const auto b = jump_cube(spec, 0.05);
  auto three = [](const Report& r) {
    return r.check("l1").pass && r.check("area_gap").pass && r.check("slab_trace").pass;
  };
  const bool ok = a.N == 81 && three(a.report) && three(b.report) && std::abs((b.N - 1) - 2 * (a.N - 1)) <= 1;
  return {ok, "N = " + std::to_string(a.N) + " at eps 0.1, N = " + std::to_string(b.N) +
                  " at eps 0.05; checks " + (three(a.report) ? "pass" : "fail") + " / " +
                  (three(b.report) ? "pass" : "fail")};
}

// 6 ------------------------------------------------------------------------

Outcome full_criterion() {
  const auto fa = full_approximation(standard_jump_field(), 0.1);
  const Report& r = fa.report;
  std::string d;
  bool ok = true;
  for (const char* name : {"overlap", "residual", "strict_gap", "trace_gap", "boundary_trace"}) {
    const Check& c = r.check(name);
    ok = ok && c.pass;
    d += std::string(name) + " " + num(c.measured) + (c.pass ? " < " : " !< ") + num(c.bound) + "; ";
  }
  d += "jump cube area " + num(r.get("jump_cube_area"));
  return {ok, d};
}

// 7 ------------------------------------------------------------------------

Outcome no_constant_criterion() {
  const Report r = no_constant_demo();
  return {r.all_pass(), "max |f_mass(u_j)| " + num(r.check("fmass_piecewise_constant").measured) +
                            ", f_mass(id) " + format_number(r.get("fmass_identity")) + ", finest TV " +
                            num(r.get("tv_finest")) + " vs target " + num(kStaircaseTvLimit)};
}

// 8 ------------------------------------------------------------------------

std::vector<std::pair<std::string, FieldPtr>> functional_corpus() {
  std::vector<std::pair<std::string, FieldPtr>> out;
  for (const auto& f : sobolev_corpus()) out.emplace_back(f.expr, ExprField::from_text({f.expr}));
  out.emplace_back("heaviside", standard_jump_field());
  out.emplace_back("ramp_jump", std::make_shared<JumpField>(Value{0.7, -0.4}, unit_from_angle(0.6),
                                                            MonotoneProfile({-0.3, 0.1, 0.4}, {0, 0.2, 0.9}, {0.1, 0.8, 1.0}),
                                                            Point{0.5, 0.5}, 0.5));
  out.emplace_back("smooth_plus_jump",
                   std::make_shared<SumField>(ExprField::from_text({"x*y"}), standard_jump_field()));
  out.emplace_back("raster", std::make_shared<RasterField>(3, 3, std::vector<double>{0, 1, 0.5, 0.2, 0.9, 0.1, 1, 0, 0.3},
                                                           1.0 / 3));
  out.emplace_back("identity", ExprField::from_text({"x", "y"}));
  auto mesh = std::make_shared<const Mesh>(uniform_triangulation({{0, 0}, {1, 1}}, 0.3));
  out.emplace_back("interpolant", interpolate(ExprField::from_text({"sin(3*x)*y"}), mesh));
  return out;
}

Outcome functional_identities() {
  bool ok = true;
  double worst_rot = 0.0, worst_ineq = 0.0;
  const double angle = 0.7;
  const ConvexPolygon square = ConvexPolygon::from_box({{0, 0}, {1, 1}});
  std::vector<Point> rv;
  for (Point p : square.vertices()) rv.push_back({std::cos(angle) * p.x - std::sin(angle) * p.y,
                                                  std::sin(angle) * p.x + std::cos(angle) * p.y});
  const Region R0{square}, R1{ConvexPolygon(rv)};
  std::string failures;
  for (const auto& [name, u] : functional_corpus()) {
    const double tv = total_variation(*u, R0).total;
    const double ar = area_functional(*u, R0).total;
    const double L = R0.area();
    const bool ineq = tv <= ar + kIdentitySlack && ar <= L + tv + kIdentitySlack;
    worst_ineq = std::max({worst_ineq, tv - ar, ar - L - tv});
    const auto v = PullbackField::rotated(u, angle);
    // (value, rotated value, scale): f_mass is bounded by |Du|/sqrt(2), so its
    // differences are measured against |Du|; the rest are relative.
    struct Triple {
      double x, y, scale;
    };
    std::vector<Triple> vals{{l1_norm(*u, R0), l1_norm(*v, R1), 0.0},
                             {tv, total_variation(*v, R1).total, 0.0},
                             {ar, area_functional(*v, R1).total, 0.0}};
    if (u->components() == 2)
      vals.push_back({f_mass(*u, R0, det_sqrt_integrand()).total, f_mass(*v, R1, det_sqrt_integrand()).total, tv});
    bool rot = true;
    for (const auto& t : vals) {
      const double denom = std::max({std::abs(t.x), t.scale, 1e-300});
      const double rel = std::abs(t.x - t.y) / denom;
      worst_rot = std::max(worst_rot, rel);
      rot = rot && rel <= kRotationRelTol;
    }
    if (!ineq || !rot) failures += " " + name;
    ok = ok && ineq && rot;
  }
  return {ok, "max inequality excess " + num(worst_ineq) + " (slack " + num(kIdentitySlack) +
                  "), max rotation rel. diff " + num(worst_rot) + (failures.empty() ? "" : "; failing:" + failures)};
}

// 9 ------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  try {
    return read_text_file(p);
  } catch (const InputError&) {
    return "<missing>";
  }
}

Outcome cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / "bvpa_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_text_file(dir / "sp.json", R"J({"kind":"smooth","exprs":["sin(pi*x)*sin(pi*y)"]})J");
  write_text_file(dir / "const0.json", R"({"kind":"smooth","exprs":["0"]})");
  write_text_file(dir / "img.pgm", "P2\n4 3\n15\n0 3 7 15\n1 1 9 9\n15 0 0 4\n");
  const std::string cli = BVPA_CLI_PATH;
  // Outputs named OUT are compared between the two runs.
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
      {"mesh uniform --k 0.2 --out OUT/m.json --svg OUT/m.svg --stats OUT/s.json", {"m.json", "m.svg", "s.json"}},
      {"mesh whitney --q 0.5,0.5,0.5,0.3 --q0 0.5,0.5,0.4,0.3 --depth 4 --out OUT/w.json --stats OUT/ws.json",
       {"w.json", "ws.json"}},
      {"approx --field IN/sp.json --mesh OUT/m.json --report OUT/a.json --out OUT/v.json", {"a.json", "v.json"}},
      {"approx --field IN/sp.json --mesh OUT/m.json --mollify 0.05 --report OUT/am.json", {"am.json"}},
      {"functional --name area --field IN/const0.json --region 0,0,1,1 --report OUT/f.json", {"f.json"}},
      {"functional --name tv --field OUT/v.json --report OUT/ftv.json", {"ftv.json"}},
      {"convergence --field IN/sp.json --csv OUT/rates.csv", {"rates.csv"}},
      {"demo smooth-cube --field IN/sp.json --epsilon 0.1 --report OUT/ds.json", {"ds.json"}},
      {"demo jump-cube --epsilon 0.1 --report OUT/dj.json", {"dj.json"}},
      {"demo full --epsilon 0.2 --report OUT/df.json --mesh-out OUT/dfm.json", {"df.json", "dfm.json"}},
      {"demo no-constant --report OUT/dn.json", {"dn.json"}},
      {"ingest --pgm IN/img.pgm --out OUT/r.json", {"r.json"}},
  };
  auto expand = [](std::string s, const std::string& key, const std::string& val) {
    for (std::size_t p; (p = s.find(key)) != std::string::npos;) s.replace(p, key.size(), val);
    return s;
  };
  std::vector<std::string> runs[2];
  int failures = 0, total = 0;
  std::string bad;
  for (int run = 0; run < 2; ++run) {
    const fs::path out = dir / ("run" + std::to_string(run));
    fs::create_directories(out);
    for (std::size_t i = 0; i < commands.size(); ++i) {
      std::string cmd = expand(expand(commands[i].first, "OUT", out.string()), "IN", dir.string());
      cmd = "\"" + cli + "\" --seed 3 " + cmd + " > \"" + (out / ("stdout" + std::to_string(i))).string() + "\" 2>&1";
      const int rc = std::system(cmd.c_str());
      std::string blob = "rc=" + std::to_string(rc) + "\n" + slurp(out / ("stdout" + std::to_string(i)));
      for (const auto& f : commands[i].second) blob += "\n--" + f + "\n" + slurp(out / f);
      runs[run].push_back(blob);
    }
  }
  for (std::size_t i = 0; i < commands.size(); ++i) {
    ++total;
    const bool same = runs[0][i] == runs[1][i];
    const bool ran = runs[0][i].rfind("rc=0\n", 0) == 0 && runs[0][i].find("<missing>") == std::string::npos;
    if (!same || !ran) {
      ++failures;
      bad += " [" + commands[i].first.substr(0, commands[i].first.find(" --")) + (ran ? ": differs]" : ": failed]");
    }
  }
  fs::remove_all(dir);
  return {failures == 0, std::to_string(total - failures) + "/" + std::to_string(total) +
                             " commands byte-identical across two runs" + bad};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"affine reproduction", affine_reproduction},
      {"interpolation constant", interpolation_constant},
      {"gradient error vs modulus", modulus_bound},
      {"staircase bounds", staircase_bounds},
      {"jump cube", jump_cube_criterion},
      {"full approximation", full_criterion},
      {"no piecewise constant approximation", no_constant_criterion},
      {"functional identities", functional_identities},
      {"cli determinism", cli_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %zu %-36s %s  %s [%.1fs]\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
