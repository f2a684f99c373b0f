#pragma once

#include <vector>

#include "casimir/mesh.hpp"

namespace casimir {

/// A collection of N >= 1 disjoint closed bodies. Bodies keep their order;
/// body j carries the 1-based label j + 1.
class Assembly {
 public:
  explicit Assembly(std::vector<SurfaceMesh> bodies);

  int size() const noexcept { return static_cast<int>(bodies_.size()); }
  const SurfaceMesh& body(int j) const { return bodies_.at(j); }
  const std::vector<SurfaceMesh>& bodies() const noexcept { return bodies_; }

  // Uniform scaling of the whole assembly about the origin.
  Assembly scaled(double s) const;
  Assembly with_body_transformed(int j, const RigidTransform& xf) const;
  Assembly with_bodies_swapped(int j, int k) const;

  int total_triangles() const;
  int total_edges() const;
  double max_edge_length() const;

 private:
  std::vector<SurfaceMesh> bodies_;
};

/// Minimum distance between the surfaces of distinct bodies, exact over all
/// triangle pairs. Returns 0 when two surfaces intersect or one body lies
/// inside another. Throws ConfigError for a single body.
double min_separation(const Assembly& assembly);

// Throws ConfigError unless every pair of bodies is separated (N = 1 passes).
void require_disjoint(const Assembly& assembly);

}  // namespace casimir
