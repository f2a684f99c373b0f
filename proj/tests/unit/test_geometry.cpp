#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

#include "doctest.h"

#include "casimir/assembly.hpp"
#include "casimir/edge_basis.hpp"
#include "casimir/mesh.hpp"
#include "casimir/mesh_io.hpp"
#include "oracles.hpp"

using namespace casimir;

namespace {

MeshDefect defect_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const MeshError& e) {
    return e.defect();
  }
  FAIL("expected a MeshError");
  return MeshDefect::parse;
}

Vec3 area_vector_sum(const SurfaceMesh& m) {
  Vec3 s = Vec3::Zero();
  for (int t = 0; t < m.num_triangles(); ++t) s += m.area_vector(t);
  return s;
}

}  // namespace

TEST_CASE("tetrahedron from OFF text") {
  std::istringstream in("OFF\n4 4 6\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n");
  const SurfaceMesh m = read_off(in);
  CHECK(m.num_vertices() == 4);
  CHECK(m.num_edges() == 6);
  CHECK(m.num_triangles() == 4);
  CHECK(m.genus() == 0);
  CHECK(m.signed_volume() == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("OFF comments and split counts line") {
  std::istringstream in("# header comment\nOFF\n# counts\n4 4 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n"
                        "3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n");
  CHECK(read_off(in).num_edges() == 6);
}

TEST_CASE("malformed OFF input is a parse error") {
  std::istringstream quad("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n");
  CHECK(defect_of([&] { read_off(quad); }) == MeshDefect::parse);
  std::istringstream truncated("OFF\n4 4 6\n0 0 0\n1 0 0\n");
  CHECK(defect_of([&] { read_off(truncated); }) == MeshDefect::parse);
}

TEST_CASE("non-manifold edge is rejected") {
  // Two tetrahedra glued along one edge share it four times.
  std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, -1, 0}, {0, 0, -1}};
  std::vector<Triangle> f = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3},
                             {0, 4, 1}, {0, 1, 5}, {0, 5, 4}, {1, 4, 5}};
  CHECK(defect_of([&] { SurfaceMesh::create(v, f); }) == MeshDefect::non_manifold_edge);
}

TEST_CASE("other invalid meshes") {
  std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  CHECK(defect_of([&] { SurfaceMesh::create(v, {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 7}}); }) ==
        MeshDefect::index_out_of_range);
  CHECK(defect_of([&] { SurfaceMesh::create(v, {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 3, 2}}); }) ==
        MeshDefect::inconsistent_orientation);
  auto v5 = v;
  v5.emplace_back(5, 5, 5);
  CHECK(defect_of([&] { SurfaceMesh::create(v5, {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}}); }) ==
        MeshDefect::unreferenced_vertex);
  auto flat = v;
  flat[3] = Vec3(0.5, 0.5, 0.0);
  CHECK_THROWS_AS(SurfaceMesh::create(flat, {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}}), MeshError);
}

TEST_CASE("inward cube: strict rejects, repair flips") {
  CHECK(defect_of([] { oracle::cube(1.0, true); }) == MeshDefect::inverted_orientation);
  const SurfaceMesh m = oracle::cube(1.0, true, OrientationPolicy::repair);
  CHECK(m.was_flipped());
  CHECK(m.signed_volume() == doctest::Approx(8.0).epsilon(1e-14));
  CHECK_FALSE(oracle::cube(1.0).was_flipped());
}

TEST_CASE("disconnected surface is rejected") {
  std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {5, 0, 0}, {6, 0, 0}, {5, 1, 0}, {5, 0, 1}};
  std::vector<Triangle> f = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}, {4, 6, 5}, {4, 5, 7}, {4, 7, 6}, {5, 6, 7}};
  CHECK(defect_of([&] { SurfaceMesh::create(v, f); }) == MeshDefect::not_connected);
}

TEST_CASE("icosphere combinatorics and projection") {
  const SurfaceMesh ico = make_icosphere(1.0, 0);
  CHECK(ico.num_vertices() == 12);
  CHECK(ico.num_edges() == 30);
  CHECK(ico.num_triangles() == 20);
  const SurfaceMesh s2 = make_icosphere(1.0, 2);
  CHECK(s2.num_triangles() == 320);
  CHECK(s2.num_vertices() == 162);
  const SurfaceMesh s3 = make_icosphere(2.0, 3);
  double dev = 0.0;
  for (const auto& p : s3.vertices()) dev = std::max(dev, std::abs(p.norm() - 2.0));
  CHECK(dev < 1e-12);
  for (int k = 0; k <= 4; ++k) {
    const SurfaceMesh m = make_icosphere(1.0, k);
    CHECK(m.euler_characteristic() == 2);
    CHECK(m.genus() == 0);
    CHECK(m.signed_volume() > 0.0);
    CHECK(m.signed_volume() < 4.0 * std::numbers::pi / 3.0);
    CHECK(area_vector_sum(m).norm() <= 1e-12 * m.surface_area());
  }
  CHECK_THROWS_AS(make_icosphere(1.0, kMaxIcosphereSubdivisions + 1), ConfigError);
  CHECK_THROWS_AS(make_icosphere(-1.0, 1), ConfigError);
}

TEST_CASE("torus is genus one") {
  const SurfaceMesh t = make_torus(2.0, 0.5, 10, 10);
  CHECK(t.num_vertices() == 100);
  CHECK(t.num_triangles() == 200);
  CHECK(t.num_edges() == 300);
  CHECK(t.euler_characteristic() == 0);
  CHECK(t.genus() == 1);
  CHECK(t.signed_volume() > 0.0);
  CHECK(area_vector_sum(t).norm() <= 1e-12 * t.surface_area());
  CHECK(EdgeBasis(Assembly({t})).size() == 300);
}

TEST_CASE("transforms") {
  const SurfaceMesh m = make_icosphere(1.0, 2);
  const SurfaceMesh id = transform(m, {});
  CHECK(id.vertices() == m.vertices());
  CHECK(id.triangles() == m.triangles());

  RigidTransform twice;
  twice.scale = 2.0;
  CHECK(transform(m, twice).signed_volume() == doctest::Approx(8.0 * m.signed_volume()).epsilon(1e-12));

  // The icosphere is symmetric under a half turn about z.
  RigidTransform half;
  half.angle = std::numbers::pi;
  const SurfaceMesh r = transform(m, half);
  double worst = 0.0;
  for (const auto& p : r.vertices()) {
    double best = 1e300;
    for (const auto& q : m.vertices()) best = std::min(best, (p - q).norm());
    worst = std::max(worst, best);
  }
  CHECK(worst < 1e-12);
  CHECK(r.signed_volume() == doctest::Approx(m.signed_volume()).epsilon(1e-12));

  RigidTransform shifted;
  shifted.translation = Vec3(1, 2, 3);
  shifted.axis = Vec3(1, 1, 0);
  shifted.angle = 0.7;
  const SurfaceMesh s = transform(m, shifted);
  CHECK((s.centroid() - Vec3(1, 2, 3)).norm() < 1e-12);
  CHECK(s.signed_volume() > 0.0);

  RigidTransform bad;
  bad.scale = 0.0;
  CHECK_THROWS_AS(transform(m, bad), ConfigError);
  bad.scale = 1.0;
  bad.axis = Vec3::Zero();
  CHECK_THROWS_AS(transform(m, bad), ConfigError);
}

TEST_CASE("triangle distance helpers") {
  const Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
  CHECK(point_triangle_distance(Vec3(0.2, 0.2, 3), a, b, c) == doctest::Approx(3.0));
  CHECK(point_triangle_distance(Vec3(-1, 0, 0), a, b, c) == doctest::Approx(1.0));
  CHECK(point_triangle_distance(Vec3(1, 1, 0), a, b, c) == doctest::Approx(std::sqrt(0.5)));
  CHECK(segment_segment_distance(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, -1, 2), Vec3(0.5, 1, 2)) ==
        doctest::Approx(2.0));
  const std::array<Vec3, 3> s{a, b, c};
  const std::array<Vec3, 3> t{Vec3(3, 0, 0), Vec3(4, 0, 0), Vec3(3, 1, 0)};
  CHECK(triangle_triangle_distance(s, t) == doctest::Approx(2.0));
}

TEST_CASE("minimum separation of two spheres") {
  const SurfaceMesh s = make_icosphere(1.0, 3);
  RigidTransform shift;
  shift.translation = Vec3(4, 0, 0);
  const Assembly two({s, transform(s, shift)});
  const double delta = min_separation(two);
  // Facets lie inside the circumscribed sphere, so the gap is at least 2 and
  // at most 2 + 2h, with h the largest offset of a facet from the sphere.
  double h = 0.0;
  for (const auto& t : s.triangles()) {
    const auto& v = s.vertices();
    h = std::max(h, 1.0 - point_triangle_distance(Vec3::Zero(), v[t[0]], v[t[1]], v[t[2]]));
  }
  double vertex_pairs = 1e300;
  for (const auto& p : two.body(0).vertices())
    for (const auto& q : two.body(1).vertices()) vertex_pairs = std::min(vertex_pairs, (p - q).norm());
  CHECK(delta >= 2.0 - 1e-12);
  CHECK(delta <= vertex_pairs + 1e-12);
  CHECK(delta <= 2.0 + 2.0 * h + 1e-12);
}

TEST_CASE("minimum separation of vertex-facing octahedra") {
  const SurfaceMesh o = oracle::octahedron(0.5);
  RigidTransform shift;
  shift.translation = Vec3(3, 0, 0);
  const Assembly two({o, transform(o, shift)});
  CHECK(min_separation(two) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(min_separation(two.with_bodies_swapped(0, 1)) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("overlap, nesting and single bodies") {
  const SurfaceMesh s = make_icosphere(1.0, 1);
  RigidTransform shift;
  shift.translation = Vec3(1, 0, 0);
  const Assembly overlap({s, transform(s, shift)});
  CHECK(min_separation(overlap) == 0.0);
  CHECK_THROWS_AS(require_disjoint(overlap), ConfigError);
  RigidTransform small;
  small.scale = 0.3;
  const Assembly nested({s, transform(s, small)});
  CHECK(min_separation(nested) == 0.0);
  CHECK_THROWS_AS(require_disjoint(nested), ConfigError);
  CHECK_THROWS_AS(min_separation(Assembly({s})), ConfigError);
  CHECK_NOTHROW(require_disjoint(Assembly({s})));
  CHECK_THROWS_AS(Assembly({}), ConfigError);
}

TEST_CASE("edge basis layout") {
  const SurfaceMesh ico = make_icosphere(1.0, 0);
  CHECK(EdgeBasis(Assembly({ico})).size() == 30);
  RigidTransform shift;
  shift.translation = Vec3(3, 0, 0);
  const Assembly two({ico, transform(ico, shift)});
  const EdgeBasis basis(two);
  CHECK(basis.size() == 60);
  CHECK(basis.num_bodies() == 2);
  CHECK(basis.block_size(0) == 30);
  CHECK(basis.block_size(1) == 30);
  CHECK(two.body(0).body_id() == 1);
  CHECK(two.body(1).body_id() == 2);
  for (int m = 0; m < basis.size(); ++m) CHECK(basis.function(m).body == (m < 30 ? 0 : 1));
}

TEST_CASE("edge basis is deterministic and ordered") {
  const Assembly a({make_icosphere(1.0, 2)});
  const EdgeBasis b1(a), b2(a);
  REQUIRE(b1.size() == b2.size());
  bool same = true;
  for (int m = 0; m < b1.size(); ++m) {
    const auto& f = b1.function(m);
    const auto& g = b2.function(m);
    same = same && f.edge == g.edge && f.triangle == g.triangle && f.free_vertex == g.free_vertex;
    if (m > 0) CHECK(std::pair(b1.function(m - 1).edge[0], b1.function(m - 1).edge[1]) < std::pair(f.edge[0], f.edge[1]));
  }
  CHECK(same);
}

TEST_CASE("divergence integrates to zero and matches the normal flux") {
  const SurfaceMesh torus = make_torus(2.0, 0.7, 12, 8);
  RigidTransform shift;
  shift.translation = Vec3(0, 0, 5);
  const Assembly a({make_icosphere(1.0, 2), transform(torus, shift)});
  const EdgeBasis basis(a);
  double worst = 0.0;
  for (int m = 0; m < basis.size(); ++m) {
    const auto& f = basis.function(m);
    double sum = 0.0, scale = 0.0;
    for (int s = 0; s < 2; ++s) {
      const double term = basis.divergence(m, f.triangle[s]) * basis.area(f.triangle[s]);
      sum += term;
      scale += std::abs(term);
    }
    worst = std::max(worst, std::abs(sum) / scale);
  }
  CHECK(worst < 1e-12);

  // The normal component of f across its edge is 1 from both sides.
  for (int m = 0; m < basis.size(); m += 37) {
    const auto& f = basis.function(m);
    const Vec3 p = basis.vertices()[f.edge[0]], q = basis.vertices()[f.edge[1]];
    const Vec3 mid = 0.5 * (p + q);
    for (int s = 0; s < 2; ++s) {
      const int t = f.triangle[s];
      const Vec3 into = mid - basis.vertices()[f.free_vertex[s]];
      const Vec3 tangent = (q - p).normalized();
      const Vec3 normal = (into - into.dot(tangent) * tangent).normalized();
      const double flux = basis.evaluate(m, t, mid).dot(normal);
      CHECK(flux == doctest::Approx(s == 0 ? 1.0 : -1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("mesh IO round trip") {
  const SurfaceMesh m = make_torus(1.5, 0.4, 9, 7);
  std::stringstream off, json;
  write_off(off, m);
  write_json_tri(json, m);
  const SurfaceMesh a = read_off(off);
  const SurfaceMesh b = read_json_tri(json);
  CHECK(a.vertices() == m.vertices());
  CHECK(a.triangles() == m.triangles());
  CHECK(b.vertices() == m.vertices());
  CHECK(b.triangles() == m.triangles());
}

TEST_CASE("json-tri schema is strict") {
  std::istringstream extra(R"({"vertices": [[0,0,0],[1,0,0],[0,1,0],[0,0,1]],
    "triangles": [[0,2,1],[0,1,3],[0,3,2],[1,2,3]], "normals": []})");
  CHECK(defect_of([&] { read_json_tri(extra); }) == MeshDefect::parse);
  std::istringstream broken("{\"vertices\": [");
  CHECK(defect_of([&] { read_json_tri(broken); }) == MeshDefect::parse);
  CHECK(parse_mesh_format("off") == MeshFormat::off);
  CHECK(mesh_format_from_path("a/b.json") == MeshFormat::json_tri);
  CHECK_THROWS_AS(parse_mesh_format("stl"), ConfigError);
}
