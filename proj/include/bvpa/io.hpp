#pragma once

// File formats: field and mesh JSON, PGM rasters, SVG mesh drawings and the
// convergence CSV.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bvpa/error.hpp"
#include "bvpa/fields.hpp"
#include "bvpa/functionals.hpp"
#include "bvpa/mesh.hpp"
#include "bvpa/piecewise_affine.hpp"
#include "bvpa/pipeline.hpp"
#include "bvpa/report.hpp"

namespace bvpa {

using Json = nlohmann::ordered_json;

inline std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot open '" + p.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_text_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write '" + p.string() + "'");
  out << text;
}

inline Json parse_json_text(const std::string& text, const std::string& what = "input") {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed JSON in " + what + ": " + e.what());
  }
}

inline Json read_json_file(const std::filesystem::path& p) { return parse_json_text(read_text_file(p), p.string()); }

inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

namespace detail {

template <class F>
auto json_guard(const std::string& what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed " + what + ": " + e.what());
  }
}

inline Point point_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw InputError("expected a point [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Json point_to_json(Point p) { return Json::array({p.x, p.y}); }

inline Value value_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || j.size() > std::size_t(kMaxComponents))
    throw InputError("expected 1 to " + std::to_string(kMaxComponents) + " components");
  Value v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
  return v;
}

inline Json value_to_json(const Value& v) {
  Json j = Json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// PGM.

struct PgmImage {
  int width = 0;
  int height = 0;
  int maxval = 255;
  std::vector<int> pixels;  ///< row-major, first row is the top of the image
};

inline PgmImage parse_pgm(const std::string& data) {
  std::size_t pos = 0;
  auto skip = [&] {
    for (;;) {
      while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
      if (pos < data.size() && data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else {
        return;
      }
    }
  };
  auto integer = [&] {
    skip();
    if (pos >= data.size() || !std::isdigit(static_cast<unsigned char>(data[pos])))
      throw InputError("malformed PGM header");
    long long v = 0;
    while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) {
      v = v * 10 + (data[pos++] - '0');
      if (v > 1'000'000'000) throw InputError("PGM number out of range");
    }
    return static_cast<int>(v);
  };
  if (data.size() < 2 || data[0] != 'P' || (data[1] != '2' && data[1] != '5'))
    throw InputError("not a PGM file (expected P2 or P5)");
  const bool binary = data[1] == '5';
  pos = 2;
  PgmImage img;
  img.width = integer();
  img.height = integer();
  img.maxval = integer();
  if (img.width < 1 || img.height < 1) throw InputError("PGM dimensions must be positive");
  if (img.maxval < 1 || img.maxval > 65535) throw InputError("PGM maxval must be in [1, 65535]");
  const std::size_t count = std::size_t(img.width) * img.height;
  img.pixels.reserve(count);
  if (binary) {
    if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos])))
      throw InputError("malformed PGM header");
    ++pos;
    const int bytes = img.maxval > 255 ? 2 : 1;
    if (data.size() - pos < count * bytes) throw InputError("PGM pixel data is truncated");
    for (std::size_t i = 0; i < count; ++i) {
      int v = static_cast<unsigned char>(data[pos++]);
      if (bytes == 2) v = (v << 8) | static_cast<unsigned char>(data[pos++]);
      img.pixels.push_back(v);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) img.pixels.push_back(integer());
  }
  for (int v : img.pixels)
    if (v > img.maxval) throw InputError("PGM pixel exceeds maxval");
  return img;
}

inline std::string format_pgm(const PgmImage& img) {
  std::ostringstream os;
  os << "P2\n" << img.width << ' ' << img.height << '\n' << img.maxval << '\n';
  for (int j = 0; j < img.height; ++j) {
    for (int i = 0; i < img.width; ++i) os << (i ? " " : "") << img.pixels[std::size_t(j) * img.width + i];
    os << '\n';
  }
  return os.str();
}

/// Gray levels scaled to [0, 1]; the pixel size defaults to 1 / max(w, h) so
/// the image fits the unit square.
inline std::shared_ptr<RasterField> raster_from_pgm(const PgmImage& img, double pixel = 0.0) {
  std::vector<double> v(std::size_t(img.width) * img.height);
  for (int j = 0; j < img.height; ++j)
    for (int i = 0; i < img.width; ++i)
      v[std::size_t(img.height - 1 - j) * img.width + i] =
          double(img.pixels[std::size_t(j) * img.width + i]) / img.maxval;
  if (!(pixel > 0)) pixel = 1.0 / std::max(img.width, img.height);
  return std::make_shared<RasterField>(img.width, img.height, std::move(v), pixel);
}

// ---------------------------------------------------------------------------
// Profiles and fields.

inline MonotoneProfile profile_from_json(const Json& j) {
  return detail::json_guard("profile", [&] {
    const std::string kind = j.value("kind", std::string("table"));
    if (kind == "heaviside") return MonotoneProfile::heaviside(j.value("at", 0.0), j.value("lo", 0.0), j.value("hi", 1.0));
    if (kind == "identity") return MonotoneProfile::identity(j.value("R", 4.0));
    if (kind == "table")
      return MonotoneProfile(j.at("t").get<std::vector<double>>(), j.at("left").get<std::vector<double>>(),
                             j.at("right").get<std::vector<double>>());
    throw InputError("unknown profile kind '" + kind + "'");
  });
}

inline Json profile_to_json(const MonotoneProfile& p) {
  return Json{{"kind", "table"}, {"t", p.breakpoints()}, {"left", p.left_values()}, {"right", p.right_values()}};
}

inline Json mesh_to_json(const Mesh& mesh);
inline Mesh mesh_from_json(const Json& j);

/// Relative "pgm" paths are resolved against base_dir.
inline FieldPtr field_from_json(const Json& j, const std::filesystem::path& base_dir = {}) {
  return detail::json_guard("field spec", [&]() -> FieldPtr {
    if (!j.is_object()) throw InputError("field spec must be a JSON object");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "smooth") {
      const auto exprs = j.at("exprs").get<std::vector<std::string>>();
      if (exprs.empty() || exprs.size() > std::size_t(kMaxComponents))
        throw InputError("smooth field needs 1 to " + std::to_string(kMaxComponents) + " expressions");
      return ExprField::from_text(exprs);
    }
    if (kind == "jump") {
      Vec2 n;
      if (j.contains("normal")) {
        n = detail::point_from_json(j.at("normal"));
      } else {
        n = unit_from_angle(j.at("angle").get<double>());
      }
      const Point c = j.contains("center") ? detail::point_from_json(j.at("center")) : Point{};
      return std::make_shared<JumpField>(detail::value_from_json(j.at("b")), n, profile_from_json(j.at("profile")), c,
                                         j.value("scale", 1.0));
    }
    if (kind == "raster") {
      if (j.contains("pgm")) {
        std::filesystem::path p = j.at("pgm").get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        return raster_from_pgm(parse_pgm(read_text_file(p)), j.value("pixel", 0.0));
      }
      return std::make_shared<RasterField>(j.at("width").get<int>(), j.at("height").get<int>(),
                                           j.at("values").get<std::vector<double>>(), j.value("pixel", 1.0));
    }
    if (kind == "sum") {
      const auto& t = j.at("terms");
      if (!t.is_array() || t.size() < 2) throw InputError("sum field needs at least two terms");
      FieldPtr acc = field_from_json(t[0], base_dir);
      for (std::size_t i = 1; i < t.size(); ++i) acc = std::make_shared<SumField>(acc, field_from_json(t[i], base_dir));
      return acc;
    }
    if (kind == "piecewise_affine") {
      auto mesh = std::make_shared<const Mesh>(mesh_from_json(j.at("mesh")));
      std::vector<AffineMap> maps;
      for (const auto& m : j.at("maps")) {
        const Value off = detail::value_from_json(m.at("offset"));
        Jacobian L(off.size());
        const auto& rows = m.at("linear");
        if (!rows.is_array() || rows.size() != std::size_t(off.size())) throw InputError("map shape mismatch");
        for (int i = 0; i < off.size(); ++i) L.rows[i] = detail::point_from_json(rows[i]);
        maps.emplace_back(L, off);
      }
      return std::make_shared<PiecewiseAffineField>(mesh, std::move(maps));
    }
    throw InputError("unknown field kind '" + kind + "'");
  });
}

inline FieldPtr read_field_file(const std::filesystem::path& p) {
  return field_from_json(read_json_file(p), p.parent_path());
}

inline Json field_to_json(const Field& f) {
  if (const auto* e = dynamic_cast<const ExprField*>(&f)) {
    Json ex = Json::array();
    for (const auto& x : e->exprs()) ex.push_back(x.to_string());
    return {{"kind", "smooth"}, {"exprs", ex}};
  }
  if (const auto* jf = dynamic_cast<const JumpField*>(&f)) {
    const Vec2 n = jf->direction();
    return {{"kind", "jump"},
            {"b", detail::value_to_json(jf->amplitude())},
            {"angle", std::atan2(n.y, n.x)},
            {"normal", detail::point_to_json(n)},
            {"profile", profile_to_json(jf->profile())},
            {"center", detail::point_to_json(jf->center())},
            {"scale", jf->scale()}};
  }
  if (const auto* r = dynamic_cast<const RasterField*>(&f))
    return {{"kind", "raster"},
            {"width", r->width()},
            {"height", r->height()},
            {"pixel", r->pixel_size()},
            {"values", r->values()}};
  if (const auto* s = dynamic_cast<const SumField*>(&f))
    return {{"kind", "sum"}, {"terms", Json::array({field_to_json(*s->first()), field_to_json(*s->second())})}};
  if (const auto* p = dynamic_cast<const PiecewiseAffineField*>(&f)) {
    Json maps = Json::array();
    for (const auto& a : p->maps()) {
      Json rows = Json::array();
      for (int i = 0; i < a.components(); ++i) rows.push_back(detail::point_to_json(a.linear.rows[i]));
      maps.push_back({{"linear", rows}, {"offset", detail::value_to_json(a.offset)}});
    }
    return {{"kind", "piecewise_affine"}, {"mesh", mesh_to_json(p->mesh())}, {"maps", maps}};
  }
  throw PreconditionError("serializable_field", "field type has no JSON form");
}

// ---------------------------------------------------------------------------
// Meshes.

inline Json mesh_to_json(const Mesh& mesh) {
  Json j;
  if (auto t = mesh.tau0()) {
    Json v = Json::array();
    for (Point p : t->vertices()) v.push_back(detail::point_to_json(p));
    j["tau0"] = v;
  } else {
    j["tau0"] = Json::array();
  }
  Json cells = Json::array();
  for (const auto& c : mesh.cells()) {
    Json cj;
    cj["id"] = c.id;
    if (const auto* s = std::get_if<Simplex>(&c.shape)) {
      cj["type"] = "simplex";
      Json v = Json::array();
      for (Point p : s->vertices()) v.push_back(detail::point_to_json(p));
      cj["vertices"] = v;
      if (auto pl = mesh.placement_of(c.id)) {
        cj["a"] = detail::point_to_json(pl->a);
        cj["M"] = Json::array({Json::array({pl->m11, pl->m12}), Json::array({pl->m21, pl->m22})});
      }
    } else {
      const auto& r = std::get<RotatedRect>(c.shape);
      cj["type"] = "rect";
      cj["center"] = detail::point_to_json(r.center());
      cj["axis"] = detail::point_to_json(r.axis());
      cj["half"] = Json::array({r.half_a(), r.half_b()});
    }
    cj["role"] = std::string(role_name(c.role));
    cells.push_back(cj);
  }
  j["cells"] = cells;
  return j;
}

/// Placements ("a", "M") are derived data and are recomputed, not read.
inline Mesh mesh_from_json(const Json& j) {
  return detail::json_guard("mesh", [&] {
    Mesh m;
    const auto& cells = j.at("cells");
    if (!cells.is_array()) throw InputError("mesh cells must be an array");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto& c = cells[i];
      if (c.contains("id") && c.at("id").get<long long>() != static_cast<long long>(i))
        throw InputError("mesh cell ids must be 0, 1, 2, ... in order");
      const std::string type = c.at("type").get<std::string>();
      const CellRole role = c.contains("role") ? role_from_name(c.at("role").get<std::string>()) : CellRole::Regular;
      if (type == "simplex") {
        const auto& v = c.at("vertices");
        if (!v.is_array() || v.size() != 3) throw InputError("simplex needs three vertices");
        m.add(Simplex(detail::point_from_json(v[0]), detail::point_from_json(v[1]), detail::point_from_json(v[2])), role);
      } else if (type == "rect") {
        const auto& h = c.at("half");
        if (!h.is_array() || h.size() != 2) throw InputError("rect half must be [a, b]");
        m.add(RotatedRect(detail::point_from_json(c.at("center")), detail::point_from_json(c.at("axis")),
                          h[0].get<double>(), h[1].get<double>()),
              role);
      } else {
        throw InputError("unknown cell type '" + type + "'");
      }
    }
    if (j.contains("tau0") && !j.at("tau0").empty()) {
      const auto& t = j.at("tau0");
      if (!t.is_array() || t.size() != 3) throw InputError("tau0 needs three vertices");
      m.set_tau0(Simplex(detail::point_from_json(t[0]), detail::point_from_json(t[1]), detail::point_from_json(t[2])));
    }
    return m;
  });
}

inline Mesh read_mesh_file(const std::filesystem::path& p) { return mesh_from_json(read_json_file(p)); }

/// SVG drawing with viewBox the mesh bounding box; y points up.
inline std::string mesh_to_svg(const Mesh& mesh) {
  const Box b = mesh.bbox();
  const double w = b.width(), h = b.height();
  const double stroke = 1e-3 * std::max(w, h);
  auto fill = [](CellRole r) {
    switch (r) {
      case CellRole::Residual: return "#f4c7c3";
      case CellRole::Slab: return "#c6dbef";
      case CellRole::Background: return "#e5f5e0";
      default: return "#ffffff";
    }
  };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << format_number(b.lo.x) << ' '
     << format_number(-b.hi.y) << ' ' << format_number(w) << ' ' << format_number(h) << "\">\n";
  os << "<g transform=\"scale(1,-1)\" stroke=\"#333333\" stroke-width=\"" << format_number(stroke) << "\">\n";
  for (const auto& c : mesh.cells()) {
    os << "<polygon fill=\"" << fill(c.role) << "\" points=\"";
    bool first = true;
    for (Point p : polygon(c.shape).vertices()) {
      os << (first ? "" : " ") << format_number(p.x) << ',' << format_number(p.y);
      first = false;
    }
    os << "\"/>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Convergence CSV.

inline ConvergenceTable parse_convergence_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "k,grad_error,omega_3k,ratio,rate")
    throw InputError("convergence CSV has the wrong header");
  ConvergenceTable t;
  auto num = [](const std::string& s) -> std::optional<double> {
    if (s == "NA") return std::nullopt;
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw InputError("bad CSV number '" + s + "'");
      return v;
    } catch (const std::logic_error&) {
      throw InputError("bad CSV number '" + s + "'");
    }
  };
  std::vector<double> ks, errs;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 5) throw InputError("convergence CSV rows need 5 fields");
    ConvergenceRow r;
    const auto k = num(f[0]), e = num(f[1]), o = num(f[2]);
    if (!k || !e || !o) throw InputError("k, grad_error and omega_3k must be numbers");
    r.k = *k;
    r.grad_error = *e;
    r.omega_3k = *o;
    r.ratio = num(f[3]);
    r.rate = num(f[4]);
    ks.push_back(r.k);
    errs.push_back(r.grad_error);
    t.rows.push_back(r);
  }
  t.fitted_rate = fitted_loglog_rate(ks, errs);
  return t;
}

// ---------------------------------------------------------------------------
// Functional reports.

inline Json functional_report_json(const std::string& name, const MeasureValue& v, const QuadratureSpec& q) {
  return {{"functional", name},
          {"ac", v.ac},
          {"singular", v.singular},
          {"total", v.total},
          {"quadrature", {{"levels", q.levels}, {"edge_nodes", q.edge_nodes}, {"split_jumps", q.split_jumps}}}};
}

}  // namespace bvpa
