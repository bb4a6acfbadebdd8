#pragma once

#include <iosfwd>
#include <vector>

#include "devquad/mesh.hpp"
#include "devquad/state.hpp"

namespace devquad {

struct RulingLine {
  int halfedge = -1;  // the halfedge h < opposite(h) of the edge
  Vec3 anchor;        // edge midpoint
  Vec3 direction;     // n_left x n_right, not normalized
  bool zero = false;
};

struct TangencyRun {
  std::vector<int> halfedges;  // consecutive boundary halfedges
};

struct RulingLineField {
  std::vector<RulingLine> lines;
  // Per boundary halfedge: the rulings of its face that should cross the
  // boundary run almost along it.
  std::vector<int> flagged_boundary_halfedges;
  std::vector<TangencyRun> warnings;  // flagged runs of sufficient length
};

struct RulingOptions {
  double zero_tolerance = 1e-10;
  double tangency_angle_deg = 15.0;
  int min_run = 3;
};

RulingLineField prospective_rulings(const QuadMesh& mesh, const RulingOptions& options = {});
// Same, from the normals of a state instead of fresh frames.
RulingLineField ruling_field(const QuadMesh& mesh, const State& state,
                             const RulingOptions& options = {});

// Segments anchor +- scale * direction / |direction| as an OBJ line set.
// Zero rulings are skipped.
void write_ruling_obj(const RulingLineField& field, double scale, std::ostream& out);

}  // namespace devquad
