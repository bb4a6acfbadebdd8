#pragma once

#include <limits>
#include <memory>
#include <vector>

#include "devquad/mesh.hpp"
#include "devquad/projection.hpp"
#include "devquad/reference.hpp"

namespace devquad {

// Row-major (rows x cols) vertex grid without wrap-around.
struct GridPatch {
  int rows = 0;
  int cols = 0;
  std::vector<Vec3> points;

  const Vec3& at(int i, int j) const { return points[static_cast<std::size_t>(i) * cols + j]; }
  QuadMesh mesh() const;
};

struct GrowSides {
  bool first_row = true;
  bool last_row = true;
  bool first_col = true;
  bool last_col = true;
};

struct GrowOptions {
  double tolerance = std::numeric_limits<double>::infinity();
  int max_rings = 4;
  GrowSides sides;
  double fair_weight = 0.01;
  double pos_weight = 1.0;
  ProjectionConfig projection;
};

struct GrowResult {
  GridPatch patch;      // last accepted patch
  int rings = 0;        // rings added to the seed
  double deviation = 0.0;  // max vertex distance of `patch` to the reference
  // Deviation of the first rejected extension, NaN if none was rejected.
  double rejected_deviation = std::numeric_limits<double>::quiet_NaN();
};

// Adds one ring of faces on the selected sides by linear extrapolation.
GridPatch extend_patch(const GridPatch& patch, const GrowSides& sides);

// Max distance of the points to the reference.
double max_deviation(const ReferenceSurface& reference, const std::vector<Vec3>& points);

// Grows the seed ring by ring, optimizing each extension for developability
// under proximity to the reference, until the deviation exceeds the
// tolerance or max_rings is reached. Throws Error{DegenerateInput} for
// seeds smaller than 2 x 2 vertices.
GrowResult grow_patch(const GridPatch& seed, std::shared_ptr<const ReferenceSurface> reference,
                      const GrowOptions& options);

}  // namespace devquad
