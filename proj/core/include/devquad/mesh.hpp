#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace devquad {

using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 4>;

// Quad mesh with implicit halfedges. Halfedge h = 4*f + i runs from
// face(f)[i] to face(f)[(i+1) % 4]; face f lies to its left.
//
// Connectivity is fixed at construction. Vertex positions may be edited,
// the combinatorics never change.
class QuadMesh {
 public:
  QuadMesh() = default;

  // Throws Error{NonQuadFace, InvalidIndex, NonManifoldEdge,
  // InconsistentOrientation} with the offending face indices.
  QuadMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int face_count() const { return static_cast<int>(faces_.size()); }
  int halfedge_count() const { return 4 * face_count(); }

  const Vec3& vertex(int v) const { return vertices_[v]; }
  std::span<const Vec3> vertices() const { return vertices_; }
  void set_vertex(int v, const Vec3& p) { vertices_[v] = p; }
  void set_vertices(std::vector<Vec3> vertices);

  const Face& face(int f) const { return faces_[f]; }
  std::span<const Face> faces() const { return faces_; }

  static constexpr int face_of(int h) { return h / 4; }
  static constexpr int corner_of(int h) { return h % 4; }
  static constexpr int next(int h) { return (h & ~3) | ((h + 1) & 3); }
  static constexpr int prev(int h) { return (h & ~3) | ((h + 3) & 3); }
  // Halfedge across the face: e_i <-> e_{i+2}.
  static constexpr int across(int h) { return (h & ~3) | ((h + 2) & 3); }

  int from(int h) const { return faces_[face_of(h)][corner_of(h)]; }
  int to(int h) const { return faces_[face_of(h)][(corner_of(h) + 1) & 3]; }
  int opposite(int h) const { return opposite_[h]; }
  bool is_boundary_halfedge(int h) const { return opposite_[h] < 0; }

  // Face on the other side of halfedge h, or -1.
  int neighbor(int h) const { return opposite_[h] < 0 ? -1 : face_of(opposite_[h]); }

  // True when all four halfedges have an opposite.
  bool is_interior_face(int f) const;
  int interior_halfedge_count() const { return interior_halfedges_; }

  // Any halfedge leaving v (a boundary one if v is on the boundary), or -1.
  int outgoing(int v) const { return outgoing_[v]; }
  int valence(int v) const { return valence_[v]; }
  bool is_boundary_vertex(int v) const { return boundary_vertex_[v] != 0; }
  // Interior vertex whose valence differs from 4.
  bool is_singular(int v) const { return !is_boundary_vertex(v) && valence_[v] != 4; }
  std::vector<int> singular_vertices() const;

  // Next outgoing halfedge when rotating around from(h); -1 at a boundary.
  int rotate(int h) const;

  // Fixed vertices are excluded from the optimization variables.
  bool is_fixed(int v) const { return fixed_[v] != 0; }
  void set_fixed(int v, bool fixed) { fixed_[v] = fixed ? 1 : 0; }
  void fix_boundary();
  std::vector<int> fixed_vertices() const;

  double bbox_diagonal() const;
  double mean_edge_length() const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::vector<int> opposite_;
  std::vector<int> outgoing_;
  std::vector<int> valence_;
  std::vector<char> boundary_vertex_;
  std::vector<char> fixed_;
  int interior_halfedges_ = 0;
};

// Regular (rows x cols) vertex grid spanned by `point(i, j)`. With
// `wrap_columns` the last column connects to the first (cylinder topology).
template <class PointFn>
QuadMesh make_grid(int rows, int cols, bool wrap_columns, PointFn point) {
  std::vector<Vec3> v;
  v.reserve(static_cast<std::size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) v.push_back(point(i, j));
  std::vector<Face> f;
  const int jmax = wrap_columns ? cols : cols - 1;
  for (int i = 0; i + 1 < rows; ++i)
    for (int j = 0; j < jmax; ++j) {
      const int j1 = (j + 1) % cols;
      f.push_back({i * cols + j, i * cols + j1, (i + 1) * cols + j1, (i + 1) * cols + j});
    }
  return QuadMesh(std::move(v), std::move(f));
}

// Doubly periodic grid (torus topology).
template <class PointFn>
QuadMesh make_torus_grid(int rows, int cols, PointFn point) {
  std::vector<Vec3> v;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) v.push_back(point(i, j));
  std::vector<Face> f;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const int i1 = (i + 1) % rows, j1 = (j + 1) % cols;
      f.push_back({i * cols + j, i * cols + j1, i1 * cols + j1, i1 * cols + j});
    }
  return QuadMesh(std::move(v), std::move(f));
}

}  // namespace devquad
