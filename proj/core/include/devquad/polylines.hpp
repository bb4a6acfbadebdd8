#pragma once

#include <array>
#include <vector>

#include "devquad/mesh.hpp"

namespace devquad {

// Maximal sequence of vertices along a mesh parameter line.
struct VertexPolyline {
  std::vector<int> vertices;
  bool closed = false;
};

// Maximal sequence of faces where consecutive faces share an edge and each
// face is left through the edge opposite to the one it was entered by.
struct FaceStrip {
  std::vector<int> faces;
  bool closed = false;
};

struct PolylineSet {
  std::vector<VertexPolyline> polylines;
  std::vector<FaceStrip> strips;
};

// Vertex polylines continue straight through regular interior vertices and
// along the boundary through valence-3 boundary vertices; they stop at
// singular vertices, corners and where they reach the boundary. Face strips
// stop at the boundary and before crossing an edge with a singular endpoint.
PolylineSet trace_polylines(const QuadMesh& mesh);

// Consecutive triples (a, b, c) of an open or closed sequence.
std::vector<std::array<int, 3>> consecutive_triples(const std::vector<int>& seq, bool closed);

// Neighbors of v in rotational order. For boundary vertices the sequence
// starts and ends with the two boundary neighbors.
std::vector<int> ordered_neighbors(const QuadMesh& mesh, int v);

}  // namespace devquad
