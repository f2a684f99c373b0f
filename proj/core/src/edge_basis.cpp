#include "casimir/edge_basis.hpp"

#include <map>
#include <utility>

namespace casimir {

EdgeBasis::EdgeBasis(const Assembly& assembly) {
  offsets_.push_back(0);
  triangle_offsets_.push_back(0);
  for (int j = 0; j < assembly.size(); ++j) {
    const SurfaceMesh& mesh = assembly.body(j);
    const int v0 = static_cast<int>(vertices_.size());
    const int t0 = static_cast<int>(triangles_.size());
    for (const auto& v : mesh.vertices()) vertices_.push_back(v);
    for (const auto& tri : mesh.triangles()) {
      triangles_.push_back({tri[0] + v0, tri[1] + v0, tri[2] + v0});
      triangle_body_.push_back(j);
    }

    // Ordered map gives the sorted (lo, hi) key order.
    struct Slot {
      int tri[2] = {-1, -1};
      int corner[2] = {-1, -1};
    };
    std::map<std::pair<int, int>, Slot> edges;
    for (int t = t0; t < static_cast<int>(triangles_.size()); ++t) {
      const auto& tri = triangles_[t];
      for (int k = 0; k < 3; ++k) {
        const int a = tri[(k + 1) % 3];
        const int b = tri[(k + 2) % 3];
        Slot& s = edges[{std::min(a, b), std::max(a, b)}];
        const int side = a < b ? 0 : 1;  // traversing lo->hi makes t the positive triangle
        s.tri[side] = t;
        s.corner[side] = k;
      }
    }
    for (const auto& [key, slot] : edges) {
      EdgeFunction f;
      f.body = j;
      f.edge = {key.first, key.second};
      f.triangle = {slot.tri[0], slot.tri[1]};
      f.free_vertex = {triangles_[slot.tri[0]][slot.corner[0]], triangles_[slot.tri[1]][slot.corner[1]]};
      f.length = (vertices_[key.second] - vertices_[key.first]).norm();
      functions_.push_back(f);
    }
    offsets_.push_back(static_cast<int>(functions_.size()));
    triangle_offsets_.push_back(static_cast<int>(triangles_.size()));
  }

  support_.assign(triangles_.size(), TriangleSupport{});
  area_.resize(triangles_.size());
  for (int t = 0; t < num_triangles(); ++t) {
    const auto c = corners(t);
    area_[t] = 0.5 * (c[1] - c[0]).cross(c[2] - c[0]).norm();
  }
  for (int m = 0; m < size(); ++m) {
    const EdgeFunction& f = functions_[m];
    for (int side = 0; side < 2; ++side) {
      const int t = f.triangle[side];
      const auto& tri = triangles_[t];
      const int k = tri[0] == f.free_vertex[side] ? 0 : (tri[1] == f.free_vertex[side] ? 1 : 2);
      support_[t].function[k] = m;
      support_[t].sign[k] = side == 0 ? 1.0 : -1.0;
    }
  }
}

std::array<Vec3, 3> EdgeBasis::corners(int t) const {
  const auto& tri = triangles_.at(t);
  return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
}

double EdgeBasis::divergence(int m, int t) const {
  const EdgeFunction& f = functions_.at(m);
  if (t == f.triangle[0]) return f.length / area_[t];
  if (t == f.triangle[1]) return -f.length / area_[t];
  return 0.0;
}

Vec3 EdgeBasis::evaluate(int m, int t, const Vec3& x) const {
  const EdgeFunction& f = functions_.at(m);
  for (int side = 0; side < 2; ++side) {
    if (t != f.triangle[side]) continue;
    const double s = side == 0 ? 1.0 : -1.0;
    return s * f.length / (2.0 * area_[t]) * (x - vertices_[f.free_vertex[side]]);
  }
  return Vec3::Zero();
}

}  // namespace casimir
