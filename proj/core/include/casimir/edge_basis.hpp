#pragma once

#include <array>
#include <vector>

#include "casimir/assembly.hpp"

namespace casimir {

/// One div-conforming edge function. On its positive triangle
/// f(x) = (l / 2A+) (x - p+) and on its negative triangle
/// f(x) = -(l / 2A-) (x - p-), where p± are the vertices opposite the edge.
struct EdgeFunction {
  int body = 0;                   // 0-based body index
  std::array<int, 2> edge{};      // global vertex indices, edge[0] < edge[1]
  std::array<int, 2> triangle{};  // global triangle index: {positive, negative}
  std::array<int, 2> free_vertex{};
  double length = 0.0;
};

// The three edge functions living on a triangle, by local corner. Corner k
// is the free vertex of function `function[k]` on this triangle.
struct TriangleSupport {
  std::array<int, 3> function{};
  std::array<double, 3> sign{};  // +1 on the positive triangle, -1 otherwise
};

/// RWG basis over every edge of every body. Functions are ordered by body,
/// then by sorted edge key, so the per-body blocks are contiguous.
class EdgeBasis {
 public:
  explicit EdgeBasis(const Assembly& assembly);

  int size() const noexcept { return static_cast<int>(functions_.size()); }
  int num_bodies() const noexcept { return static_cast<int>(offsets_.size()) - 1; }
  // Basis indices of body j are [offset(j), offset(j+1)).
  int offset(int j) const { return offsets_.at(j); }
  int block_size(int j) const { return offsets_.at(j + 1) - offsets_.at(j); }
  const std::vector<int>& offsets() const noexcept { return offsets_; }

  const EdgeFunction& function(int m) const { return functions_.at(m); }
  const std::vector<EdgeFunction>& functions() const noexcept { return functions_; }

  // Flattened geometry of all bodies.
  const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
  const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
  int num_triangles() const noexcept { return static_cast<int>(triangles_.size()); }
  int triangle_body(int t) const { return triangle_body_.at(t); }
  // Triangles of body j are [triangle_offset(j), triangle_offset(j+1)).
  int triangle_offset(int j) const { return triangle_offsets_.at(j); }
  const TriangleSupport& support(int t) const { return support_.at(t); }
  double area(int t) const { return area_.at(t); }
  std::array<Vec3, 3> corners(int t) const;

  // Piecewise constant surface divergence of function m on triangle t.
  double divergence(int m, int t) const;
  // Value of function m at point x of triangle t (zero off its support).
  Vec3 evaluate(int m, int t, const Vec3& x) const;

 private:
  std::vector<EdgeFunction> functions_;
  std::vector<int> offsets_;
  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<int> triangle_body_;
  std::vector<int> triangle_offsets_;
  std::vector<TriangleSupport> support_;
  std::vector<double> area_;
};

}  // namespace casimir
