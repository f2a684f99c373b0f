#include "casimir/mesh_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace casimir {

namespace {

// Next non-empty line with '#' comments stripped.
bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

[[noreturn]] void parse_fail(const std::string& what) { throw MeshError(MeshDefect::parse, what); }

}  // namespace

MeshFormat parse_mesh_format(const std::string& name) {
  if (name == "off") return MeshFormat::off;
  if (name == "json-tri" || name == "json") return MeshFormat::json_tri;
  throw ConfigError("unknown mesh format '" + name + "' (expected off or json-tri)");
}

MeshFormat mesh_format_from_path(const std::string& path) {
  auto ends_with = [&](const std::string& suffix) {
    return path.size() >= suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with(".off")) return MeshFormat::off;
  if (ends_with(".json")) return MeshFormat::json_tri;
  throw ConfigError("cannot infer mesh format from '" + path + "'");
}

SurfaceMesh read_off(std::istream& in, OrientationPolicy policy) {
  std::string line;
  if (!next_content_line(in, line)) parse_fail("empty OFF file");
  std::istringstream header(line);
  std::string magic;
  header >> magic;
  if (magic != "OFF") parse_fail("missing OFF header");

  long nv = -1, nf = -1, ne = 0;
  if (!(header >> nv >> nf)) {
    if (!next_content_line(in, line)) parse_fail("missing counts line");
    std::istringstream counts(line);
    if (!(counts >> nv >> nf)) parse_fail("malformed counts line");
    counts >> ne;
  }
  if (nv <= 0 || nf <= 0) parse_fail("vertex and face counts must be positive");

  std::vector<Vec3> vertices;
  vertices.reserve(nv);
  for (long i = 0; i < nv; ++i) {
    if (!next_content_line(in, line)) parse_fail("unexpected end of file in vertex list");
    std::istringstream ss(line);
    double x, y, z;
    if (!(ss >> x >> y >> z)) parse_fail("malformed vertex line " + std::to_string(i));
    vertices.emplace_back(x, y, z);
  }
  std::vector<Triangle> triangles;
  triangles.reserve(nf);
  for (long i = 0; i < nf; ++i) {
    if (!next_content_line(in, line)) parse_fail("unexpected end of file in face list");
    std::istringstream ss(line);
    int arity;
    Triangle t;
    if (!(ss >> arity)) parse_fail("malformed face line " + std::to_string(i));
    if (arity != 3) parse_fail("face " + std::to_string(i) + " is not a triangle");
    if (!(ss >> t[0] >> t[1] >> t[2])) parse_fail("malformed face line " + std::to_string(i));
    triangles.push_back(t);
  }
  return SurfaceMesh::create(std::move(vertices), std::move(triangles), policy);
}

SurfaceMesh read_json_tri(std::istream& in, OrientationPolicy policy) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    parse_fail(e.what());
  }
  if (!doc.is_object() || !doc.contains("vertices") || !doc.contains("triangles")) {
    parse_fail("expected an object with 'vertices' and 'triangles'");
  }
  for (const auto& [key, _] : doc.items()) {
    if (key != "vertices" && key != "triangles") parse_fail("unknown key '" + key + "'");
  }
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  try {
    for (const auto& v : doc.at("vertices")) {
      if (v.size() != 3) parse_fail("vertex must have 3 coordinates");
      vertices.emplace_back(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
    }
    for (const auto& t : doc.at("triangles")) {
      if (t.size() != 3) parse_fail("triangle must have 3 indices");
      triangles.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>()});
    }
  } catch (const nlohmann::json::exception& e) {
    parse_fail(e.what());
  }
  return SurfaceMesh::create(std::move(vertices), std::move(triangles), policy);
}

SurfaceMesh load_mesh(const std::string& path, MeshFormat format, OrientationPolicy policy) {
  std::ifstream in(path);
  if (!in) throw MeshError(MeshDefect::parse, "cannot open '" + path + "'");
  return format == MeshFormat::off ? read_off(in, policy) : read_json_tri(in, policy);
}

void write_off(std::ostream& out, const SurfaceMesh& mesh) {
  out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' ' << mesh.num_edges() << '\n';
  out << std::setprecision(17);
  for (const auto& p : mesh.vertices()) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

void write_json_tri(std::ostream& out, const SurfaceMesh& mesh) {
  nlohmann::json doc;
  doc["vertices"] = nlohmann::json::array();
  for (const auto& p : mesh.vertices()) doc["vertices"].push_back({p.x(), p.y(), p.z()});
  doc["triangles"] = nlohmann::json::array();
  for (const auto& t : mesh.triangles()) doc["triangles"].push_back({t[0], t[1], t[2]});
  out << doc.dump() << '\n';
}

void save_mesh(const std::string& path, const SurfaceMesh& mesh, MeshFormat format) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  if (format == MeshFormat::off) {
    write_off(out, mesh);
  } else {
    write_json_tri(out, mesh);
  }
}

}  // namespace casimir
