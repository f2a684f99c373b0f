#include "scene.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

namespace casimir::cli {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

Vec3 get_vec3(const json& obj, const std::string& key, const std::string& where, const Vec3& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto v = get<std::vector<double>>(obj, key, where, {});
  if (v.size() != 3) throw ConfigError(where + "." + key + ": expected 3 numbers");
  return Vec3(v[0], v[1], v[2]);
}

void check(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

BodySpec parse_body(const json& b, const std::string& where, const std::string& base_dir) {
  require_keys(b, where, {"shape", "translate", "rotate_axis_angle", "scale"});
  if (!b.contains("shape")) throw ConfigError(where + ": missing 'shape'");
  const json& s = b.at("shape");
  const std::string sw = where + ".shape";
  if (!s.is_object() || !s.contains("type")) throw ConfigError(sw + ": expected an object with 'type'");
  BodySpec body;
  const auto type = get<std::string>(s, "type", sw, "");
  if (type == "sphere") {
    require_keys(s, sw, {"type", "radius", "subdivisions"});
    body.radius = get(s, "radius", sw, 1.0);
    body.subdivisions = get(s, "subdivisions", sw, 2);
    check(body.radius > 0.0, sw + ".radius must be positive");
    check(body.subdivisions >= 0 && body.subdivisions <= kMaxIcosphereSubdivisions,
          sw + ".subdivisions out of range [0, " + std::to_string(kMaxIcosphereSubdivisions) + "]");
  } else if (type == "torus") {
    body.shape = BodySpec::Shape::torus;
    require_keys(s, sw, {"type", "major_radius", "minor_radius", "n_major", "n_minor"});
    body.major_radius = get(s, "major_radius", sw, body.major_radius);
    body.minor_radius = get(s, "minor_radius", sw, body.minor_radius);
    body.n_major = get(s, "n_major", sw, body.n_major);
    body.n_minor = get(s, "n_minor", sw, body.n_minor);
    check(body.minor_radius > 0.0 && body.major_radius > body.minor_radius, sw + ": need 0 < minor < major");
    check(body.n_major >= 3 && body.n_minor >= 3, sw + ": need at least 3 segments each way");
  } else if (type == "mesh") {
    body.shape = BodySpec::Shape::mesh;
    require_keys(s, sw, {"type", "path", "format"});
    const auto path = get<std::string>(s, "path", sw, "");
    check(!path.empty(), sw + ".path is required");
    const std::filesystem::path p(path);
    body.path = p.is_absolute() ? path : (std::filesystem::path(base_dir) / p).string();
    body.format = s.contains("format") ? parse_mesh_format(get<std::string>(s, "format", sw, ""))
                                       : mesh_format_from_path(body.path);
  } else {
    throw ConfigError(sw + ".type must be sphere, torus or mesh");
  }
  body.translate = get_vec3(b, "translate", where, Vec3::Zero());
  if (b.contains("rotate_axis_angle")) {
    const auto r = get<std::vector<double>>(b, "rotate_axis_angle", where, {});
    check(r.size() == 4, where + ".rotate_axis_angle: expected [x, y, z, radians]");
    body.axis = Vec3(r[0], r[1], r[2]);
    check(body.axis.norm() > 0.0, where + ".rotate_axis_angle: zero axis");
    body.axis.normalize();
    body.angle = r[3];
  }
  body.scale = get(b, "scale", where, 1.0);
  check(body.scale > 0.0 && std::isfinite(body.scale), where + ".scale must be positive");
  return body;
}

SolverConfig parse_solver(const json& s) {
  const std::string w = "solver";
  require_keys(s, w,
               {"kappa_min", "rel_tol", "singular_order", "far_degree", "near_degree", "near_ratio",
                "panel_order", "lmax_oracle", "doubling_check", "doubling_tolerance"});
  SolverConfig c;
  c.kappa_min = get(s, "kappa_min", w, c.kappa_min);
  c.rel_tol = get(s, "rel_tol", w, c.rel_tol);
  auto& q = c.assembly.quadrature;
  q.singular_order = get(s, "singular_order", w, q.singular_order);
  q.far_degree = get(s, "far_degree", w, q.far_degree);
  q.near_degree = get(s, "near_degree", w, q.near_degree);
  q.near_ratio = get(s, "near_ratio", w, q.near_ratio);
  c.panels.panel_order = get(s, "panel_order", w, c.panels.panel_order);
  c.lmax_oracle = get(s, "lmax_oracle", w, c.lmax_oracle);
  c.doubling_check = get(s, "doubling_check", w, c.doubling_check);
  c.doubling_tolerance = get(s, "doubling_tolerance", w, c.doubling_tolerance);
  check(c.kappa_min >= 0.0, "solver.kappa_min must be >= 0");
  check(c.rel_tol > 0.0 && c.rel_tol <= 1e-1, "solver.rel_tol must lie in (0, 0.1]");
  check(q.singular_order >= 1 && q.singular_order <= 20, "solver.singular_order must lie in [1, 20]");
  check(q.far_degree >= 1 && q.far_degree <= kMaxTriangleDegree, "solver.far_degree out of range");
  check(q.near_degree >= 1 && q.near_degree <= kMaxTriangleDegree, "solver.near_degree out of range");
  check(q.near_ratio > 0.0, "solver.near_ratio must be positive");
  check(c.panels.panel_order >= 2 && c.panels.panel_order <= 40, "solver.panel_order must lie in [2, 40]");
  check(c.lmax_oracle >= 1 && c.lmax_oracle <= 120, "solver.lmax_oracle must lie in [1, 120]");
  check(c.doubling_tolerance > 0.0, "solver.doubling_tolerance must be positive");
  return c;
}

}  // namespace

SceneConfig SceneConfig::parse(const json& doc, const std::string& base_dir) {
  require_keys(doc, "scene", {"bodies", "solver", "output"});
  if (!doc.contains("bodies") || !doc.at("bodies").is_array() || doc.at("bodies").empty()) {
    throw ConfigError("scene: 'bodies' must be a non-empty array");
  }
  SceneConfig scene;
  int i = 0;
  for (const auto& b : doc.at("bodies")) {
    scene.bodies.push_back(parse_body(b, "bodies[" + std::to_string(i++) + "]", base_dir));
  }
  if (doc.contains("solver")) scene.solver = parse_solver(doc.at("solver"));
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    require_keys(o, "output", {"path", "format"});
    scene.output.path = get<std::string>(o, "path", "output", "");
    scene.output.format = get<std::string>(o, "format", "output", "");
    check(scene.output.format.empty() || scene.output.format == "csv" || scene.output.format == "json",
          "output.format must be csv or json");
  }
  return scene;
}

SceneConfig SceneConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scene '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("scene '" + path + "': " + e.what());
  }
  return parse(doc, std::filesystem::path(path).parent_path().string());
}

Assembly SceneConfig::assembly() const {
  std::vector<SurfaceMesh> meshes;
  for (const auto& b : bodies) {
    SurfaceMesh m = [&] {
      switch (b.shape) {
        case BodySpec::Shape::sphere: return make_icosphere(b.radius, b.subdivisions);
        case BodySpec::Shape::torus: return make_torus(b.major_radius, b.minor_radius, b.n_major, b.n_minor);
        case BodySpec::Shape::mesh: break;
      }
      return load_mesh(b.path, b.format);
    }();
    RigidTransform xf;
    xf.translation = b.translate;
    xf.axis = b.axis;
    xf.angle = b.angle;
    xf.scale = b.scale;
    meshes.push_back(transform(m, xf));
  }
  Assembly a(std::move(meshes));
  require_disjoint(a);
  return a;
}

std::optional<std::vector<Sphere>> SceneConfig::spheres() const {
  std::vector<Sphere> out;
  for (const auto& b : bodies) {
    if (b.shape != BodySpec::Shape::sphere) return std::nullopt;
    out.push_back({b.translate, b.radius * b.scale});
  }
  return out;
}

nlohmann::json SceneConfig::resolved() const {
  json doc;
  doc["bodies"] = json::array();
  for (const auto& b : bodies) {
    json j;
    switch (b.shape) {
      case BodySpec::Shape::sphere:
        j["shape"] = {{"type", "sphere"}, {"radius", b.radius}, {"subdivisions", b.subdivisions}};
        break;
      case BodySpec::Shape::torus:
        j["shape"] = {{"type", "torus"},
                      {"major_radius", b.major_radius},
                      {"minor_radius", b.minor_radius},
                      {"n_major", b.n_major},
                      {"n_minor", b.n_minor}};
        break;
      case BodySpec::Shape::mesh:
        j["shape"] = {{"type", "mesh"}, {"path", b.path}, {"format", b.format == MeshFormat::off ? "off" : "json-tri"}};
        break;
    }
    j["translate"] = {b.translate.x(), b.translate.y(), b.translate.z()};
    j["rotate_axis_angle"] = {b.axis.x(), b.axis.y(), b.axis.z(), b.angle};
    j["scale"] = b.scale;
    doc["bodies"].push_back(j);
  }
  const auto& q = solver.assembly.quadrature;
  doc["solver"] = {{"kappa_min", solver.kappa_min},
                   {"rel_tol", solver.rel_tol},
                   {"singular_order", q.singular_order},
                   {"far_degree", q.far_degree},
                   {"near_degree", q.near_degree},
                   {"near_ratio", q.near_ratio},
                   {"panel_order", solver.panels.panel_order},
                   {"lmax_oracle", solver.lmax_oracle},
                   {"doubling_check", solver.doubling_check},
                   {"doubling_tolerance", solver.doubling_tolerance}};
  doc["output"] = {{"path", output.path}, {"format", output.format}};
  return doc;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash(const nlohmann::json& resolved) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(resolved.dump())));
  return buf;
}

}  // namespace casimir::cli
