#include "casimir/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace casimir {

Assembly::Assembly(std::vector<SurfaceMesh> bodies) {
  if (bodies.empty()) throw ConfigError("an assembly needs at least one body");
  bodies_.reserve(bodies.size());
  for (std::size_t j = 0; j < bodies.size(); ++j) bodies_.push_back(bodies[j].relabeled(static_cast<int>(j) + 1));
}

Assembly Assembly::scaled(double s) const {
  RigidTransform xf;
  xf.scale = s;
  std::vector<SurfaceMesh> out;
  for (const auto& b : bodies_) out.push_back(transform(b, xf));
  return Assembly(std::move(out));
}

Assembly Assembly::with_body_transformed(int j, const RigidTransform& xf) const {
  std::vector<SurfaceMesh> out = bodies_;
  out.at(j) = transform(out.at(j), xf);
  return Assembly(std::move(out));
}

Assembly Assembly::with_bodies_swapped(int j, int k) const {
  std::vector<SurfaceMesh> out = bodies_;
  std::swap(out.at(j), out.at(k));
  return Assembly(std::move(out));
}

int Assembly::total_triangles() const {
  int n = 0;
  for (const auto& b : bodies_) n += b.num_triangles();
  return n;
}

int Assembly::total_edges() const {
  int n = 0;
  for (const auto& b : bodies_) n += b.num_edges();
  return n;
}

double Assembly::max_edge_length() const {
  double h = 0.0;
  for (const auto& b : bodies_) h = std::max(h, b.max_edge_length());
  return h;
}

namespace {

struct TriangleBound {
  std::array<Vec3, 3> corners;
  Vec3 center;
  double radius;
};

std::vector<TriangleBound> bounds_of(const SurfaceMesh& mesh) {
  std::vector<TriangleBound> out;
  out.reserve(mesh.triangles().size());
  for (const auto& tri : mesh.triangles()) {
    TriangleBound b;
    for (int k = 0; k < 3; ++k) b.corners[k] = mesh.vertices()[tri[k]];
    b.center = (b.corners[0] + b.corners[1] + b.corners[2]) / 3.0;
    b.radius = 0.0;
    for (const auto& c : b.corners) b.radius = std::max(b.radius, (c - b.center).norm());
    out.push_back(b);
  }
  return out;
}

double surface_distance(const SurfaceMesh& a, const SurfaceMesh& b) {
  const auto ba = bounds_of(a);
  const auto bb = bounds_of(b);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : ba) {
    for (const auto& t : bb) {
      const double lower = (s.center - t.center).norm() - s.radius - t.radius;
      if (lower >= best) continue;
      best = std::min(best, triangle_triangle_distance(s.corners, t.corners));
      if (best == 0.0) return 0.0;
    }
  }
  return best;
}

bool nested(const SurfaceMesh& a, const SurfaceMesh& b) {
  return std::abs(winding_number(b, a.vertices().front())) > 0.5 ||
         std::abs(winding_number(a, b.vertices().front())) > 0.5;
}

}  // namespace

double min_separation(const Assembly& assembly) {
  if (assembly.size() < 2) throw ConfigError("separation is undefined for a single body");
  double delta = std::numeric_limits<double>::infinity();
  for (int j = 0; j < assembly.size(); ++j) {
    for (int k = j + 1; k < assembly.size(); ++k) {
      const double d = surface_distance(assembly.body(j), assembly.body(k));
      if (d == 0.0 || nested(assembly.body(j), assembly.body(k))) return 0.0;
      delta = std::min(delta, d);
    }
  }
  return delta;
}

void require_disjoint(const Assembly& assembly) {
  if (assembly.size() < 2) return;
  if (!(min_separation(assembly) > 0.0)) {
    throw ConfigError("bodies overlap or touch (minimum separation is 0)");
  }
}

}  // namespace casimir
