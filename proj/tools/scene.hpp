#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "casimir/assembly.hpp"
#include "casimir/functional.hpp"
#include "casimir/mesh_io.hpp"

namespace casimir::cli {

struct BodySpec {
  enum class Shape { sphere, torus, mesh };
  Shape shape = Shape::sphere;
  double radius = 1.0;  // sphere
  int subdivisions = 2;
  double major_radius = 2.0, minor_radius = 0.5;  // torus
  int n_major = 24, n_minor = 12;
  std::string path;  // mesh, resolved against the scene directory
  MeshFormat format = MeshFormat::off;
  Vec3 translate = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();
  double angle = 0.0;  // radians
  double scale = 1.0;
};

struct OutputSpec {
  std::string path;    // empty: stdout
  std::string format;  // "csv" or "json"; empty: per command
};

/// Parsed scene document. Unknown keys and out-of-range values are
/// rejected with ConfigError.
struct SceneConfig {
  std::vector<BodySpec> bodies;
  SolverConfig solver;
  OutputSpec output;

  static SceneConfig parse(const nlohmann::json& doc, const std::string& base_dir = ".");
  static SceneConfig load(const std::string& path);

  Assembly assembly() const;
  // Oracle spheres, when every body is an untransformed-about-centre sphere.
  std::optional<std::vector<Sphere>> spheres() const;
  // Canonical document with every default filled in.
  nlohmann::json resolved() const;
};

// FNV-1a over the canonical dump of a JSON document.
std::uint64_t fnv1a(const std::string& text);
std::string config_hash(const nlohmann::json& resolved);

}  // namespace casimir::cli
