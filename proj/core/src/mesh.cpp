#include "casimir/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <unordered_map>

#include <Eigen/Geometry>

namespace casimir {

const char* to_string(MeshDefect defect) noexcept {
  switch (defect) {
    case MeshDefect::parse: return "parse error";
    case MeshDefect::index_out_of_range: return "vertex index out of range";
    case MeshDefect::degenerate_triangle: return "degenerate triangle";
    case MeshDefect::non_manifold_edge: return "non-manifold edge";
    case MeshDefect::inconsistent_orientation: return "inconsistent orientation";
    case MeshDefect::inverted_orientation: return "inverted orientation";
    case MeshDefect::unreferenced_vertex: return "unreferenced vertex";
    case MeshDefect::not_connected: return "surface not connected";
  }
  return "unknown mesh defect";
}

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey undirected(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

double signed_volume_of(const std::vector<Vec3>& v, const std::vector<Triangle>& tris) {
  double vol = 0.0;
  for (const auto& t : tris) vol += v[t[0]].dot(v[t[1]].cross(v[t[2]]));
  return vol / 6.0;
}

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

SurfaceMesh SurfaceMesh::create(std::vector<Vec3> vertices, std::vector<Triangle> triangles,
                                OrientationPolicy policy) {
  const int nv = static_cast<int>(vertices.size());
  if (triangles.empty()) throw MeshError(MeshDefect::parse, "mesh has no triangles");

  for (std::size_t t = 0; t < triangles.size(); ++t) {
    for (int i : triangles[t]) {
      if (i < 0 || i >= nv) {
        throw MeshError(MeshDefect::index_out_of_range,
                        "triangle " + std::to_string(t) + " references vertex " + std::to_string(i));
      }
    }
  }

  Eigen::AlignedBox3d box;
  for (const auto& p : vertices) box.extend(p);
  const double length_scale = box.diagonal().norm();
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const auto& tri = triangles[t];
    const double area =
        0.5 * (vertices[tri[1]] - vertices[tri[0]]).cross(vertices[tri[2]] - vertices[tri[0]]).norm();
    if (!(area > 1e-15 * length_scale * length_scale)) {
      throw MeshError(MeshDefect::degenerate_triangle, "triangle " + std::to_string(t) + " has zero area");
    }
  }

  // Each undirected edge must appear exactly twice, once per direction.
  std::map<EdgeKey, int> edge_use;
  std::map<EdgeKey, int> directed_use;
  for (const auto& tri : triangles) {
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k];
      const int b = tri[(k + 1) % 3];
      ++edge_use[undirected(a, b)];
      ++directed_use[{a, b}];
    }
  }
  for (const auto& [edge, count] : edge_use) {
    if (count != 2) {
      throw MeshError(MeshDefect::non_manifold_edge,
                      "edge (" + std::to_string(edge.first) + "," + std::to_string(edge.second) +
                          ") is used by " + std::to_string(count) + " triangles");
    }
  }
  for (const auto& [edge, count] : directed_use) {
    if (count != 1) {
      throw MeshError(MeshDefect::inconsistent_orientation,
                      "directed edge (" + std::to_string(edge.first) + "," + std::to_string(edge.second) +
                          ") is traversed twice in the same direction");
    }
  }

  std::vector<int> parent(nv);
  std::vector<bool> referenced(nv, false);
  for (int i = 0; i < nv; ++i) parent[i] = i;
  for (const auto& tri : triangles) {
    for (int k = 0; k < 3; ++k) {
      referenced[tri[k]] = true;
      const int ra = find_root(parent, tri[k]);
      const int rb = find_root(parent, tri[(k + 1) % 3]);
      if (ra != rb) parent[ra] = rb;
    }
  }
  for (int i = 0; i < nv; ++i) {
    if (!referenced[i]) throw MeshError(MeshDefect::unreferenced_vertex, "vertex " + std::to_string(i));
  }
  const int root = find_root(parent, 0);
  for (int i = 1; i < nv; ++i) {
    if (find_root(parent, i) != root) {
      throw MeshError(MeshDefect::not_connected, "a body must be a single closed surface");
    }
  }

  SurfaceMesh mesh;
  const double volume = signed_volume_of(vertices, triangles);
  if (volume <= 0.0) {
    if (policy == OrientationPolicy::strict) {
      throw MeshError(MeshDefect::inverted_orientation,
                      "signed volume " + std::to_string(volume) + " is not positive");
    }
    for (auto& tri : triangles) std::swap(tri[1], tri[2]);
    mesh.flipped_ = true;
  }

  mesh.num_edges_ = static_cast<int>(edge_use.size());
  mesh.vertices_ = std::move(vertices);
  mesh.triangles_ = std::move(triangles);
  return mesh;
}

SurfaceMesh SurfaceMesh::relabeled(int body_id) const {
  SurfaceMesh copy = *this;
  copy.body_id_ = body_id;
  return copy;
}

double SurfaceMesh::signed_volume() const { return signed_volume_of(vertices_, triangles_); }

Vec3 SurfaceMesh::area_vector(int t) const {
  const auto& tri = triangles_[t];
  return 0.5 * (vertices_[tri[1]] - vertices_[tri[0]]).cross(vertices_[tri[2]] - vertices_[tri[0]]);
}

double SurfaceMesh::triangle_area(int t) const { return area_vector(t).norm(); }

double SurfaceMesh::surface_area() const {
  double a = 0.0;
  for (int t = 0; t < num_triangles(); ++t) a += triangle_area(t);
  return a;
}

Vec3 SurfaceMesh::centroid() const {
  Vec3 c = Vec3::Zero();
  for (const auto& p : vertices_) c += p;
  return c / static_cast<double>(vertices_.size());
}

double SurfaceMesh::max_edge_length() const {
  double h = 0.0;
  for (const auto& tri : triangles_) {
    for (int k = 0; k < 3; ++k) h = std::max(h, (vertices_[tri[k]] - vertices_[tri[(k + 1) % 3]]).norm());
  }
  return h;
}

SurfaceMesh make_icosphere(double radius, int subdivisions) {
  if (!(radius > 0.0)) throw ConfigError("icosphere radius must be positive");
  if (subdivisions < 0 || subdivisions > kMaxIcosphereSubdivisions) {
    throw ConfigError("icosphere subdivisions must lie in [0, " + std::to_string(kMaxIcosphereSubdivisions) + "]");
  }

  const double phi = std::numbers::phi;
  std::vector<Vec3> v = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
                         {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
                         {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  std::vector<Triangle> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (auto& p : v) p.normalize();

  for (int level = 0; level < subdivisions; ++level) {
    std::map<EdgeKey, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = undirected(a, b);
      if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int id = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Triangle> refined;
    refined.reserve(4 * f.size());
    for (const auto& t : f) {
      const int ab = mid(t[0], t[1]);
      const int bc = mid(t[1], t[2]);
      const int ca = mid(t[2], t[0]);
      refined.push_back({t[0], ab, ca});
      refined.push_back({t[1], bc, ab});
      refined.push_back({t[2], ca, bc});
      refined.push_back({ab, bc, ca});
    }
    f = std::move(refined);
  }
  for (auto& p : v) p *= radius / p.norm();
  return SurfaceMesh::create(std::move(v), std::move(f));
}

SurfaceMesh make_torus(double major_radius, double minor_radius, int n_major, int n_minor) {
  if (!(major_radius > minor_radius && minor_radius > 0.0)) {
    throw ConfigError("torus requires major_radius > minor_radius > 0");
  }
  if (n_major < 3 || n_minor < 3) throw ConfigError("torus needs at least 3 segments in each direction");
  std::vector<Vec3> v;
  v.reserve(static_cast<std::size_t>(n_major) * n_minor);
  for (int i = 0; i < n_major; ++i) {
    const double u = 2.0 * std::numbers::pi * i / n_major;
    for (int j = 0; j < n_minor; ++j) {
      const double w = 2.0 * std::numbers::pi * j / n_minor;
      const double rho = major_radius + minor_radius * std::cos(w);
      v.emplace_back(rho * std::cos(u), rho * std::sin(u), minor_radius * std::sin(w));
    }
  }
  auto id = [&](int i, int j) { return (i % n_major) * n_minor + (j % n_minor); };
  std::vector<Triangle> f;
  f.reserve(2 * v.size());
  for (int i = 0; i < n_major; ++i) {
    for (int j = 0; j < n_minor; ++j) {
      f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return SurfaceMesh::create(std::move(v), std::move(f));
}

SurfaceMesh transform(const SurfaceMesh& mesh, const RigidTransform& xf) {
  if (!(xf.scale > 0.0)) throw ConfigError("transform scale must be positive");
  if (!(xf.axis.norm() > 0.0)) throw ConfigError("rotation axis must be nonzero");
  const Eigen::Matrix3d rotation = Eigen::AngleAxisd(xf.angle, xf.axis.normalized()).toRotationMatrix();
  std::vector<Vec3> v;
  v.reserve(mesh.vertices().size());
  for (const auto& p : mesh.vertices()) v.push_back(xf.scale * (rotation * p) + xf.translation);
  return SurfaceMesh::create(std::move(v), mesh.triangles()).relabeled(mesh.body_id());
}

// Closest-point queries follow the region classification in Ericson,
// Real-Time Collision Detection, sections 5.1.5 and 5.1.9.
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return ap.norm();

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return bp.norm();

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return (p - (a + d1 / (d1 - d3) * ab)).norm();

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return cp.norm();

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return (p - (a + d2 / (d2 - d6) * ac)).norm();

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + w * (c - b))).norm();
  }
  const double denom = 1.0 / (va + vb + vc);
  const Vec3 closest = a + ab * (vb * denom) + ac * (vc * denom);
  return (p - closest).norm();
}

double segment_segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
  const Vec3 d1 = p1 - p0;
  const Vec3 d2 = q1 - q0;
  const Vec3 r = p0 - q0;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  double s = 0.0;
  double t = 0.0;
  if (a <= 0.0 && e <= 0.0) return r.norm();
  if (a <= 0.0) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= 0.0) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p0 + s * d1) - (q0 + t * d2)).norm();
}

namespace {

bool segment_crosses_triangle(const Vec3& p, const Vec3& q, const std::array<Vec3, 3>& tri) {
  const Vec3 n = (tri[1] - tri[0]).cross(tri[2] - tri[0]);
  const double dp = n.dot(p - tri[0]);
  const double dq = n.dot(q - tri[0]);
  if ((dp > 0.0 && dq > 0.0) || (dp < 0.0 && dq < 0.0)) return false;
  if (dp == dq) return false;  // parallel; covered by the edge distances
  const Vec3 x = p + (dp / (dp - dq)) * (q - p);
  for (int k = 0; k < 3; ++k) {
    const Vec3 e = tri[(k + 1) % 3] - tri[k];
    if (n.dot(e.cross(x - tri[k])) < 0.0) return false;
  }
  return true;
}

}  // namespace

double triangle_triangle_distance(const std::array<Vec3, 3>& s, const std::array<Vec3, 3>& t) {
  for (int k = 0; k < 3; ++k) {
    if (segment_crosses_triangle(s[k], s[(k + 1) % 3], t)) return 0.0;
    if (segment_crosses_triangle(t[k], t[(k + 1) % 3], s)) return 0.0;
  }
  double d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    d = std::min(d, point_triangle_distance(s[k], t[0], t[1], t[2]));
    d = std::min(d, point_triangle_distance(t[k], s[0], s[1], s[2]));
    for (int l = 0; l < 3; ++l) {
      d = std::min(d, segment_segment_distance(s[k], s[(k + 1) % 3], t[l], t[(l + 1) % 3]));
    }
  }
  return d;
}

double winding_number(const SurfaceMesh& mesh, const Vec3& p) {
  // Van Oosterom-Strackee solid angle per triangle.
  double omega = 0.0;
  for (const auto& tri : mesh.triangles()) {
    const Vec3 a = mesh.vertices()[tri[0]] - p;
    const Vec3 b = mesh.vertices()[tri[1]] - p;
    const Vec3 c = mesh.vertices()[tri[2]] - p;
    const double la = a.norm();
    const double lb = b.norm();
    const double lc = c.norm();
    const double num = a.dot(b.cross(c));
    const double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
    omega += 2.0 * std::atan2(num, den);
  }
  return omega / (4.0 * std::numbers::pi);
}

}  // namespace casimir
