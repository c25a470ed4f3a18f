// Command-line front end. Exit codes: 1 malformed input, 2 violated
// precondition, 3 internal check failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bvpa/bvpa.hpp"

namespace fs = std::filesystem;
using namespace bvpa;

namespace {

std::vector<double> parse_numbers(const std::string& text, std::size_t expected, const std::string& what) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::logic_error&) {
      throw InputError("bad number '" + cell + "' in " + what);
    }
  }
  if (expected > 0 && v.size() != expected)
    throw InputError(what + " needs " + std::to_string(expected) + " comma-separated numbers");
  if (v.empty()) throw InputError(what + " is empty");
  return v;
}

Box parse_box(const std::string& text, const std::string& what) {
  const auto v = parse_numbers(text, 4, what);
  if (!(v[0] < v[2] && v[1] < v[3])) throw InputError(what + " must be x0,y0,x1,y1 with x0 < x1 and y0 < y1");
  return {{v[0], v[1]}, {v[2], v[3]}};
}

Point parse_point(const std::string& text, const std::string& what) {
  const auto v = parse_numbers(text, 2, what);
  return {v[0], v[1]};
}

/// cx,cy,half[,angle]
RotatedRect parse_cube(const std::string& text, const std::string& what) {
  const auto v = parse_numbers(text, 0, what);
  if (v.size() != 3 && v.size() != 4) throw InputError(what + " must be cx,cy,half[,angle]");
  const Vec2 axis = v.size() == 4 ? unit_from_angle(v[3]) : Vec2{1, 0};
  return {{v[0], v[1]}, axis, v[2], v[2]};
}

Json with_provenance(Json j, const std::string& command, std::uint64_t seed, const QuadratureSpec& q) {
  j["provenance"] = {{"command", command}, {"seed", seed}, {"quad_level", q.levels}};
  return j;
}

Json stats_json(const MeshStats& s) {
  return {{"cells", s.cells}, {"alpha", s.alpha}, {"gamma", s.gamma}, {"k", s.k}, {"min_diam", s.min_diam}, {"K", s.K}};
}

void write_mesh_outputs(const Mesh& m, const std::string& out, const std::string& svg) {
  if (!out.empty()) write_text_file(out, dump_json(mesh_to_json(m)));
  if (!svg.empty()) write_text_file(svg, mesh_to_svg(m));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Piecewise affine approximation of BV fields"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  int quad_level = 2;
  app.add_option("--seed", seed, "Seed for all sampling")->capture_default_str();
  app.add_option("--quad-level", quad_level, "Quadrature refinement depth")->check(CLI::Range(0, 8))->capture_default_str();

  // mesh
  auto* mesh_cmd = app.add_subcommand("mesh", "Build a mesh");
  mesh_cmd->require_subcommand(1);
  std::string out, svg, stats_out;
  int stats_samples = 20000;
  auto* uni = mesh_cmd->add_subcommand("uniform", "Uniform triangulation of a box");
  std::string domain_s = "0,0,1,1";
  double k = 0.1;
  uni->add_option("--domain", domain_s, "x0,y0,x1,y1")->capture_default_str();
  uni->add_option("--k", k, "Target cell diameter")->required();
  auto* whit = mesh_cmd->add_subcommand("whitney", "Dyadic annulus triangulation between two cubes");
  std::string q_s, q0_s;
  int depth = 8;
  whit->add_option("--q", q_s, "Outer cube cx,cy,half[,angle]")->required();
  whit->add_option("--q0", q0_s, "Inner cube cx,cy,half[,angle]")->required();
  whit->add_option("--depth", depth, "Number of layers")->capture_default_str();
  for (auto* c : {uni, whit}) {
    c->add_option("--out", out, "Mesh JSON output")->required();
    c->add_option("--svg", svg, "SVG drawing output");
    c->add_option("--stats", stats_out, "Mesh statistics JSON output");
    c->add_option("--stats-samples", stats_samples, "Overlap sampling points")->capture_default_str();
  }

  // approx
  auto* approx = app.add_subcommand("approx", "Interpolate a field on a mesh");
  std::string field_s, mesh_s, report_s, field_out;
  std::optional<double> mollify_eps;
  approx->add_option("--field", field_s, "Field JSON")->required();
  approx->add_option("--mesh", mesh_s, "Mesh JSON")->required();
  approx->add_option("--mollify", mollify_eps, "Global mollification radius");
  approx->add_option("--report", report_s, "Report JSON output")->required();
  approx->add_option("--out", field_out, "Piecewise affine field JSON output");

  // functional
  auto* func = app.add_subcommand("functional", "Evaluate a functional on a region");
  std::string name, region_s = "0,0,1,1";
  func->add_option("--name", name, "l1, tv, area or fmass")->required()->check(CLI::IsMember({"l1", "tv", "area", "fmass"}));
  func->add_option("--field", field_s, "Field JSON")->required();
  func->add_option("--region", region_s, "x0,y0,x1,y1")->capture_default_str();
  func->add_option("--report", report_s, "Report JSON output (stdout if absent)");

  // convergence
  auto* conv = app.add_subcommand("convergence", "Gradient error table on uniform meshes");
  std::string ks_s = "0.4,0.2,0.1,0.05", csv_s;
  conv->add_option("--field", field_s, "Field JSON")->required();
  conv->add_option("--k", ks_s, "Decreasing mesh sizes")->capture_default_str();
  conv->add_option("--domain", domain_s, "x0,y0,x1,y1")->capture_default_str();
  conv->add_option("--csv", csv_s, "CSV output (stdout if absent)");

  // demo
  auto* demo = app.add_subcommand("demo", "Run a demonstration");
  demo->require_subcommand(1);
  double eps = 0.1;
  std::string x0_s = "0.5,0.5", rs_s = "0.2,0.1,0.05,0.025", levels_s = "4,8,16,32,64";
  double r = 0.25;
  int cubes = 2, full_depth = 3;
  auto* d_smooth = demo->add_subcommand("smooth-cube", "Taylor approximation on shrinking cubes");
  d_smooth->add_option("--x0", x0_s, "Centre x,y")->capture_default_str();
  d_smooth->add_option("--r", rs_s, "Half sides")->capture_default_str();
  auto* d_jump = demo->add_subcommand("jump-cube", "Staircase approximation on a jump cube");
  d_jump->add_option("--x0", x0_s, "Centre x,y")->capture_default_str();
  d_jump->add_option("--r", r, "Half side")->capture_default_str();
  auto* d_full = demo->add_subcommand("full", "Full assembly on the unit square");
  d_full->add_option("--cubes", cubes, "Jump cubes along the line")->capture_default_str();
  d_full->add_option("--depth", full_depth, "Annulus layers")->capture_default_str();
  d_full->add_option("--mesh-out", out, "Mesh JSON output");
  d_full->add_option("--svg", svg, "SVG drawing output");
  auto* d_nc = demo->add_subcommand("no-constant", "Piecewise constant approximants of the identity");
  d_nc->add_option("--levels", levels_s, "Staircase levels")->capture_default_str();
  for (auto* c : {d_smooth, d_jump, d_full, d_nc}) {
    c->add_option("--report", report_s, "Report JSON output (stdout if absent)");
    if (c != d_nc) {
      c->add_option("--field", field_s, "Field JSON");
      c->add_option("--epsilon", eps, "Tolerance")->capture_default_str();
    }
  }

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Turn a PGM image into a raster field");
  std::string pgm_s;
  ingest->add_option("--pgm", pgm_s, "PGM image (P2 or P5)")->required();
  ingest->add_option("--out", out, "Field JSON output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  QuadratureSpec q;
  q.levels = quad_level;
  auto emit = [&](const Json& j) {
    if (report_s.empty()) {
      std::cout << dump_json(j);
    } else {
      write_text_file(report_s, dump_json(j));
    }
  };

  try {
    if (*mesh_cmd) {
      Mesh m;
      std::string command;
      Json info = Json::object();
      if (*uni) {
        m = uniform_triangulation(parse_box(domain_s, "--domain"), k);
        command = "mesh uniform";
      } else {
        AnnulusInfo ai;
        m = whitney_annulus(parse_cube(q_s, "--q"), parse_cube(q0_s, "--q0"), depth, &ai);
        info = {{"eta", ai.eta},           {"depth", ai.depth},         {"residual_width", ai.residual_width},
                {"residual_area", ai.residual_area}, {"ratio_min", ai.ratio_min}, {"ratio_max", ai.ratio_max}};
        command = "mesh whitney";
      }
      write_mesh_outputs(m, out, svg);
      if (!stats_out.empty()) {
        Json s = stats_json(mesh_stats(m, stats_samples, seed));
        if (!info.empty()) s["annulus"] = info;
        s["max_relative_overlap"] = max_relative_overlap(m);
        write_text_file(stats_out, dump_json(with_provenance(s, command, seed, q)));
      }
      std::cout << m.size() << " cells\n";
    } else if (*approx) {
      const FieldPtr u = read_field_file(field_s);
      auto mesh = std::make_shared<const Mesh>(read_mesh_file(mesh_s));
      InterpolationOptions opt;
      if (mollify_eps) {
        opt.mode = MollifyMode::Global;
        opt.epsilon = *mollify_eps;
      }
      const auto v = interpolate(u, mesh, opt);
      const Region region(*mesh);
      Report rep;
      rep.kind = "approx";
      rep.set("cells", mesh->size());
      rep.set("l1_gap", l1_distance(*u, *v, region, q));
      rep.set("grad_error", gradient_error(*u, *v, q));
      rep.set("trace_gap", trace_gap(*u, *v, *mesh, q));
      rep.set("tv_u", total_variation(*u, region, q).total);
      rep.set("tv_v", total_variation(*v, region, q).total);
      rep.set("area_u", area_functional(*u, region, q).total);
      rep.set("area_v", area_functional(*v, region, q).total);
      if (!field_out.empty()) write_text_file(field_out, dump_json(field_to_json(*v)));
      if (report_s.empty()) throw InputError("--report is required");
      emit(with_provenance(to_json(rep), "approx", seed, q));
    } else if (*func) {
      const FieldPtr u = read_field_file(field_s);
      const Region region{ConvexPolygon::from_box(parse_box(region_s, "--region"))};
      MeasureValue v;
      if (name == "l1") {
        v.ac = v.total = l1_norm(*u, region, q);
      } else if (name == "tv") {
        v = total_variation(*u, region, q);
      } else if (name == "area") {
        v = area_functional(*u, region, q);
      } else {
        v = f_mass(*u, region, det_sqrt_integrand(), q);
      }
      emit(with_provenance(functional_report_json(name, v, q), "functional", seed, q));
    } else if (*conv) {
      const FieldPtr u = read_field_file(field_s);
      const auto t = convergence_study(u, parse_numbers(ks_s, 0, "--k"), parse_box(domain_s, "--domain"), q);
      if (csv_s.empty()) {
        std::cout << to_csv(t);
      } else {
        write_text_file(csv_s, to_csv(t));
      }
    } else if (*demo) {
      const FieldPtr u = field_s.empty() ? nullptr : read_field_file(field_s);
      Report rep;
      std::string command;
      if (*d_smooth) {
        if (!u) throw InputError("smooth-cube needs --field");
        rep = smooth_cube_demo(u, parse_point(x0_s, "--x0"), parse_numbers(rs_s, 0, "--r"), eps, {{0, 0}, {1, 1}}, q);
        command = "demo smooth-cube";
      } else if (*d_jump) {
        rep = jump_cube_demo(jump_cube_spec(u ? u : standard_jump_field(), parse_point(x0_s, "--x0"), r), eps, q);
        command = "demo jump-cube";
      } else if (*d_full) {
        FullOptions opt;
        opt.cubes = cubes;
        opt.depth = full_depth;
        auto fa = full_approximation(u ? u : standard_jump_field(), eps, opt, q);
        write_mesh_outputs(*fa.mesh, out, svg);
        rep = fa.report;
        command = "demo full";
      } else {
        std::vector<int> levels;
        for (double x : parse_numbers(levels_s, 0, "--levels")) {
          if (x != std::floor(x) || x < 1 || x > 4096) throw InputError("--levels must be positive integers");
          levels.push_back(static_cast<int>(x));
        }
        rep = no_constant_demo(levels, q);
        command = "demo no-constant";
      }
      emit(with_provenance(to_json(rep), command, seed, q));
      if (!rep.all_pass()) std::cerr << "note: some checks did not pass\n";
    } else if (*ingest) {
      const auto raster = raster_from_pgm(parse_pgm(read_text_file(pgm_s)));
      const fs::path out_dir = fs::absolute(fs::path(out)).parent_path();
      const fs::path rel = fs::relative(fs::absolute(pgm_s), out_dir);
      const Json j{{"kind", "raster"}, {"pgm", rel.generic_string()}, {"pixel", raster->pixel_size()}};
      write_text_file(out, dump_json(j));
      std::cout << raster->width() << "x" << raster->height() << " raster\n";
    }
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition violated [" << e.check() << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
