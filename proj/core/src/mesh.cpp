#include "devquad/mesh.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_map>

#include "devquad/error.hpp"

namespace devquad {

namespace {

std::uint64_t directed_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

}  // namespace

QuadMesh::QuadMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  const int nv = vertex_count();
  const int nf = face_count();

  for (int f = 0; f < nf; ++f) {
    const Face& q = faces_[f];
    for (int i = 0; i < 4; ++i) {
      if (q[i] < 0 || q[i] >= nv)
        throw Error(ErrorCode::InvalidIndex, "face references a missing vertex", {f});
      for (int k = 0; k < i; ++k)
        if (q[k] == q[i])
          throw Error(ErrorCode::NonQuadFace, "face repeats a vertex", {f});
    }
  }

  std::unordered_map<std::uint64_t, int> undirected;
  std::unordered_map<std::uint64_t, int> directed;
  undirected.reserve(4 * faces_.size());
  directed.reserve(4 * faces_.size());
  for (int h = 0; h < 4 * nf; ++h) {
    const int a = from(h), b = to(h);
    ++undirected[directed_key(std::min(a, b), std::max(a, b))];
  }
  for (int h = 0; h < 4 * nf; ++h) {
    const int a = from(h), b = to(h);
    if (undirected[directed_key(std::min(a, b), std::max(a, b))] > 2) {
      std::vector<int> bad;
      for (int g = 0; g < 4 * nf; ++g)
        if ((from(g) == a && to(g) == b) || (from(g) == b && to(g) == a))
          bad.push_back(face_of(g));
      throw Error(ErrorCode::NonManifoldEdge, "edge shared by more than two faces", bad);
    }
    auto [it, inserted] = directed.emplace(directed_key(a, b), h);
    if (!inserted)
      throw Error(ErrorCode::InconsistentOrientation,
                  "two faces traverse a shared edge in the same direction",
                  {face_of(it->second), face_of(h)});
  }

  opposite_.assign(4 * nf, -1);
  interior_halfedges_ = 0;
  for (int h = 0; h < 4 * nf; ++h) {
    auto it = directed.find(directed_key(to(h), from(h)));
    if (it != directed.end()) {
      opposite_[h] = it->second;
      ++interior_halfedges_;
    }
  }

  outgoing_.assign(nv, -1);
  boundary_vertex_.assign(nv, 0);
  valence_.assign(nv, 0);
  fixed_.assign(nv, 0);
  for (int h = 0; h < 4 * nf; ++h) {
    const int a = from(h);
    if (opposite_[h] < 0) {
      boundary_vertex_[a] = 1;
      boundary_vertex_[to(h)] = 1;
      outgoing_[a] = h;  // prefer a boundary halfedge as the rotation start
    } else if (outgoing_[a] < 0) {
      outgoing_[a] = h;
    }
    // each undirected interior edge counted once per endpoint via its smaller halfedge
    if (opposite_[h] < 0 || h < opposite_[h]) {
      ++valence_[a];
      ++valence_[to(h)];
    }
  }
}

void QuadMesh::set_vertices(std::vector<Vec3> vertices) {
  if (vertices.size() != vertices_.size())
    throw Error(ErrorCode::CountMismatch, "vertex count differs from the mesh");
  vertices_ = std::move(vertices);
}

bool QuadMesh::is_interior_face(int f) const {
  for (int i = 0; i < 4; ++i)
    if (opposite_[4 * f + i] < 0) return false;
  return true;
}

std::vector<int> QuadMesh::singular_vertices() const {
  std::vector<int> out;
  for (int v = 0; v < vertex_count(); ++v)
    if (is_singular(v)) out.push_back(v);
  return out;
}

int QuadMesh::rotate(int h) const {
  const int o = opposite_[prev(h)];
  return o;  // opposite(prev(h)) leaves from(h) in the neighboring face
}

void QuadMesh::fix_boundary() {
  for (int v = 0; v < vertex_count(); ++v)
    if (is_boundary_vertex(v)) fixed_[v] = 1;
}

std::vector<int> QuadMesh::fixed_vertices() const {
  std::vector<int> out;
  for (int v = 0; v < vertex_count(); ++v)
    if (fixed_[v]) out.push_back(v);
  return out;
}

double QuadMesh::bbox_diagonal() const {
  if (vertices_.empty()) return 0.0;
  Vec3 lo = vertices_.front(), hi = vertices_.front();
  for (const Vec3& p : vertices_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

double QuadMesh::mean_edge_length() const {
  double sum = 0.0;
  int count = 0;
  for (int h = 0; h < halfedge_count(); ++h) {
    if (opposite_[h] >= 0 && opposite_[h] < h) continue;
    sum += (vertices_[to(h)] - vertices_[from(h)]).norm();
    ++count;
  }
  return count ? sum / count : 0.0;
}

}  // namespace devquad
