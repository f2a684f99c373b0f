#pragma once

#include <iosfwd>
#include <string>

#include "casimir/mesh.hpp"

namespace casimir {

enum class MeshFormat { off, json_tri };

// "off" / "json-tri" (also accepts "json").
MeshFormat parse_mesh_format(const std::string& name);
// Picks the format from a file extension (.off, .json).
MeshFormat mesh_format_from_path(const std::string& path);

SurfaceMesh load_mesh(const std::string& path, MeshFormat format,
                      OrientationPolicy policy = OrientationPolicy::strict);

// ASCII OFF: "OFF" header, "V F E" counts, V vertex lines, F lines "3 i j k".
SurfaceMesh read_off(std::istream& in, OrientationPolicy policy = OrientationPolicy::strict);
// {"vertices": [[x,y,z],...], "triangles": [[i,j,k],...]}
SurfaceMesh read_json_tri(std::istream& in, OrientationPolicy policy = OrientationPolicy::strict);

void write_off(std::ostream& out, const SurfaceMesh& mesh);
void write_json_tri(std::ostream& out, const SurfaceMesh& mesh);
void save_mesh(const std::string& path, const SurfaceMesh& mesh, MeshFormat format);

}  // namespace casimir
