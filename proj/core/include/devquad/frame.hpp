#pragma once

#include <array>
#include <span>

#include "devquad/mesh.hpp"

namespace devquad {

// Checkerboard data of a face: the midpoint parallelogram, its center and
// unit normal. The plane through `barycenter` with `normal` is the discrete
// tangent plane of the face.
struct CheckerboardFrame {
  std::array<Vec3, 4> midpoints;
  Vec3 barycenter;
  Vec3 normal;
};

// Cross product (v2 - v0) x (v3 - v1) of the face diagonals, unnormalized.
Vec3 diagonal_cross(std::span<const Vec3> positions, const Face& face);

// Degeneracy threshold on |diagonal_cross| for a mesh with the given
// bounding-box diagonal.
double degenerate_tolerance(double bbox_diagonal);

// Throws Error{DegenerateFace} when the diagonal cross product vanishes.
CheckerboardFrame build_frame(const QuadMesh& mesh, int face);
CheckerboardFrame build_frame(std::span<const Vec3> positions, const Face& face, double tolerance,
                              int face_index = -1);

}  // namespace devquad
