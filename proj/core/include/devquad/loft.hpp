#pragma once

#include <vector>

#include "devquad/mesh.hpp"

namespace devquad {

struct Polyline3 {
  std::vector<Vec3> points;
  bool closed = false;

  double length() const;
};

// Arc-length resampling to `count` points. Closed curves do not repeat
// their first point. Throws Error{CountMismatch} for curves shorter than
// two points or of zero length.
std::vector<Vec3> resample_arc_length(const Polyline3& curve, int count);

struct LoftOptions {
  int rows = 8;      // vertex rows including both curves, >= 4
  int samples = 0;   // 0: keep the input points when both counts agree
};

// Ruled initial mesh between two curves: row k interpolates linearly at
// t = k / (rows - 1). Rows 0 and rows-1 are the (resampled) curves and are
// marked fixed. Closed curves give cylinder topology.
// Throws Error{CountMismatch, DegenerateInput}.
QuadMesh loft_init(const Polyline3& a, const Polyline3& b, const LoftOptions& options);

}  // namespace devquad
