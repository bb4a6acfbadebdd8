#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "devquad/loft.hpp"
#include "devquad/mesh.hpp"
#include "devquad/reference.hpp"

namespace devquad {

// Quad-only Wavefront OBJ. Texture and normal indices are ignored; the
// vertex order of each face defines its orientation. Input without faces
// is a ParseError. Throws Error{ParseError, NonQuadFace, InvalidIndex, NonManifoldEdge,
// InconsistentOrientation}.
QuadMesh read_obj(std::istream& in);
QuadMesh load_mesh(const std::filesystem::path& path);

// Coordinates are written with 17 significant digits.
void write_obj(const QuadMesh& mesh, std::ostream& out);
void write_obj(std::span<const Vec3> vertices, std::span<const Face> faces, std::ostream& out);
void save_mesh(const QuadMesh& mesh, const std::filesystem::path& path);

// Polylines from `v` and `l` records; a line whose last index equals its
// first is closed. Without `l` records all vertices form one open curve.
std::vector<Polyline3> read_curves(std::istream& in);
std::vector<Polyline3> load_curves(const std::filesystem::path& path);

// Triangle mesh for closest-point queries; polygons are fanned. Throws
// Error{EmptyReference} for a file without faces.
ReferenceSurface read_reference(std::istream& in);
ReferenceSurface load_reference(const std::filesystem::path& path);

// Points from `v` records (e.g. a gliding curve cloud).
std::vector<Vec3> load_points(const std::filesystem::path& path);

}  // namespace devquad
