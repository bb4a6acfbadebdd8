#include "devquad/frame.hpp"

#include "devquad/error.hpp"

namespace devquad {

Vec3 diagonal_cross(std::span<const Vec3> positions, const Face& face) {
  const Vec3 d0 = positions[face[2]] - positions[face[0]];
  const Vec3 d1 = positions[face[3]] - positions[face[1]];
  return d0.cross(d1);
}

double degenerate_tolerance(double bbox_diagonal) {
  return 1e-12 * bbox_diagonal * bbox_diagonal;
}

CheckerboardFrame build_frame(std::span<const Vec3> positions, const Face& face, double tolerance,
                              int face_index) {
  CheckerboardFrame frame;
  for (int i = 0; i < 4; ++i)
    frame.midpoints[i] = 0.5 * (positions[face[i]] + positions[face[(i + 1) & 3]]);
  frame.barycenter = 0.25 * (positions[face[0]] + positions[face[1]] + positions[face[2]] +
                             positions[face[3]]);
  const Vec3 c = diagonal_cross(positions, face);
  const double len = c.norm();
  if (!(len > tolerance))
    throw Error(ErrorCode::DegenerateFace, "face diagonals are parallel or vanish",
                face_index >= 0 ? std::vector<int>{face_index} : std::vector<int>{});
  frame.normal = c / len;
  return frame;
}

CheckerboardFrame build_frame(const QuadMesh& mesh, int face) {
  return build_frame(mesh.vertices(), mesh.face(face), degenerate_tolerance(mesh.bbox_diagonal()),
                     face);
}

}  // namespace devquad
