#pragma once

#include <vector>

#include "devquad/mesh.hpp"
#include "devquad/polylines.hpp"

namespace devquad {

struct Strip {
  std::vector<int> faces;           // face ids of the parent mesh
  std::vector<int> fixed_vertices;  // parent vertex ids held in place
};

struct StripDecomposition {
  std::vector<Strip> strips;
  std::vector<int> cut_polylines;  // ids into trace_polylines(mesh).polylines
};

// Cuts the mesh along the chosen vertex polylines. Vertices on a cut are
// fixed in every strip that touches them; vertices already fixed in the
// mesh stay fixed.
//
// Throws Error{InvalidIndex} for unknown polyline ids, Error{NonSeparating}
// when a polyline does not separate two different strips, and
// Error{StripTooNarrow} when a strip is less than `min_width` faces wide.
StripDecomposition decompose_strips(const QuadMesh& mesh, const PolylineSet& lines,
                                    const std::vector<int>& polyline_ids, int min_width = 3);

// Width of a face set: the smallest, over its faces, of the shorter of the
// two face runs through the face that stay inside the set.
int strip_width(const QuadMesh& mesh, const std::vector<int>& faces,
                const std::vector<char>& cut_halfedge);

struct SubMesh {
  QuadMesh mesh;
  std::vector<int> parent_vertex;  // local vertex -> parent vertex
  std::vector<int> parent_face;    // local face -> parent face
};

// Extracts a strip as its own mesh with its fixed vertices marked.
SubMesh extract_strip(const QuadMesh& mesh, const Strip& strip);

}  // namespace devquad
