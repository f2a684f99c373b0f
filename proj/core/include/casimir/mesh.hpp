#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "casimir/error.hpp"

namespace casimir {

using Vec3 = Eigen::Vector3d;
using Triangle = std::array<int, 3>;

enum class OrientationPolicy {
  strict,  // inward-facing surfaces are rejected
  repair,  // inward-facing surfaces are flipped and flagged
};

/// Closed, consistently oriented, connected triangle surface of a single body.
///
/// Instances are only obtainable through `SurfaceMesh::create` (or the
/// generators below), which validate every invariant: each edge is shared by
/// exactly two triangles traversing it in opposite directions, no triangle is
/// degenerate, every vertex is referenced, the surface is connected and the
/// enclosed signed volume is positive. Immutable after construction.
class SurfaceMesh {
 public:
  static SurfaceMesh create(std::vector<Vec3> vertices, std::vector<Triangle> triangles,
                            OrientationPolicy policy = OrientationPolicy::strict);

  const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
  const std::vector<Triangle>& triangles() const noexcept { return triangles_; }

  int num_vertices() const noexcept { return static_cast<int>(vertices_.size()); }
  int num_triangles() const noexcept { return static_cast<int>(triangles_.size()); }
  int num_edges() const noexcept { return num_edges_; }
  int euler_characteristic() const noexcept { return num_vertices() - num_edges_ + num_triangles(); }
  int genus() const noexcept { return (2 - euler_characteristic()) / 2; }

  // 1-based label assigned by the owning Assembly; 0 for free-standing meshes.
  int body_id() const noexcept { return body_id_; }
  SurfaceMesh relabeled(int body_id) const;

  // True when OrientationPolicy::repair had to reverse the winding.
  bool was_flipped() const noexcept { return flipped_; }

  double signed_volume() const;
  double surface_area() const;
  double triangle_area(int t) const;
  // Half the cross product of two edges; its direction is the outward normal.
  Vec3 area_vector(int t) const;
  Vec3 centroid() const;
  // Largest edge length over all triangles.
  double max_edge_length() const;

 private:
  SurfaceMesh() = default;

  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  int num_edges_ = 0;
  int body_id_ = 0;
  bool flipped_ = false;
};

// Geodesic sphere centred at the origin: 20 * 4^k triangles, every vertex at
// exactly `radius` from the centre.
constexpr int kMaxIcosphereSubdivisions = 7;
SurfaceMesh make_icosphere(double radius, int subdivisions);

// Genus-one torus around the z axis with n_major * n_minor vertices.
SurfaceMesh make_torus(double major_radius, double minor_radius, int n_major, int n_minor);

struct RigidTransform {
  Vec3 translation = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();
  double angle = 0.0;  // radians, right-handed about `axis`
  double scale = 1.0;
};

// Maps every vertex by x -> scale * R * x + translation.
SurfaceMesh transform(const SurfaceMesh& mesh, const RigidTransform& xf);

// Euclidean distance helpers on flat triangles.
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);
double segment_segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1);
double triangle_triangle_distance(const std::array<Vec3, 3>& s, const std::array<Vec3, 3>& t);

// Generalized winding number of the closed surface around p (1 inside, 0 outside).
double winding_number(const SurfaceMesh& mesh, const Vec3& p);

}  // namespace casimir
