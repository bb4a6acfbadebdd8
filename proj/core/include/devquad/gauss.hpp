#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "devquad/mesh.hpp"
#include "devquad/state.hpp"

namespace devquad {

struct GaussStats {
  double max = 0.0;
  double median = 0.0;
  double mean = 0.0;
  double mean_gap = 0.0;  // mean |n_f - n_f'| over interior edges
  int faces = 0;          // interior faces measured
};

struct GaussImage {
  std::vector<Vec3> points;                 // one unit normal per face
  std::vector<std::array<int, 2>> segments; // faces adjacent across an edge
  // |det(n1 - n3, n0 - n2, n_f)| with n_i the neighbor across e_i; NaN for
  // faces touching the boundary.
  std::vector<double> degeneracy;
  GaussStats stats;
};

GaussImage gauss_image(const QuadMesh& mesh);
GaussImage gauss_image(const QuadMesh& mesh, const State& state);

void write_gauss_obj(const GaussImage& image, std::ostream& out);

}  // namespace devquad
