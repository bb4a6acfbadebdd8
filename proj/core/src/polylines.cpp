#include "devquad/polylines.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_set>

namespace devquad {

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

class PolylineWalker {
 public:
  explicit PolylineWalker(const QuadMesh& mesh) : mesh_(mesh), nbrs_(mesh.vertex_count()) {
    for (int v = 0; v < mesh.vertex_count(); ++v) nbrs_[v] = ordered_neighbors(mesh, v);
  }

  // Vertex after `v` when arriving from `prev`, or -1 if the line stops.
  int step(int prev, int v) const {
    const auto& n = nbrs_[v];
    const auto it = std::find(n.begin(), n.end(), prev);
    if (it == n.end()) return -1;
    const int idx = static_cast<int>(it - n.begin());
    if (!mesh_.is_boundary_vertex(v)) {
      if (n.size() != 4) return -1;
      return n[(idx + 2) % 4];
    }
    if (n.size() != 3) return -1;
    if (idx == 0) return n[2];
    if (idx == 2) return n[0];
    return -1;
  }

 private:
  const QuadMesh& mesh_;
  std::vector<std::vector<int>> nbrs_;
};

}  // namespace

std::vector<int> ordered_neighbors(const QuadMesh& mesh, int v) {
  std::vector<int> out;
  const int start = mesh.outgoing(v);
  if (start < 0) return out;
  int h = start;
  while (true) {
    out.push_back(mesh.to(h));
    const int next = mesh.rotate(h);
    if (next < 0) {
      out.push_back(mesh.from(QuadMesh::prev(h)));
      break;
    }
    if (next == start) break;
    h = next;
    if (out.size() > static_cast<std::size_t>(mesh.halfedge_count())) break;
  }
  return out;
}

std::vector<std::array<int, 3>> consecutive_triples(const std::vector<int>& seq, bool closed) {
  std::vector<std::array<int, 3>> out;
  const int n = static_cast<int>(seq.size());
  if (closed) {
    if (n < 3) return out;
    for (int i = 0; i < n; ++i) out.push_back({seq[(i + n - 1) % n], seq[i], seq[(i + 1) % n]});
  } else {
    for (int i = 1; i + 1 < n; ++i) out.push_back({seq[i - 1], seq[i], seq[i + 1]});
  }
  return out;
}

PolylineSet trace_polylines(const QuadMesh& mesh) {
  PolylineSet out;
  const PolylineWalker walker(mesh);

  std::unordered_set<std::uint64_t> visited;
  for (int h = 0; h < mesh.halfedge_count(); ++h) {
    const int a = mesh.from(h), b = mesh.to(h);
    if (!visited.insert(edge_key(a, b)).second) continue;

    VertexPolyline line;
    std::vector<int> forward{a, b};
    bool closed = false;
    for (int prev = a, cur = b;;) {
      const int nxt = walker.step(prev, cur);
      if (nxt < 0) break;
      if (cur == a && nxt == b) {
        closed = true;
        break;
      }
      visited.insert(edge_key(cur, nxt));
      if (nxt == a && walker.step(cur, a) == b) {
        closed = true;
        break;
      }
      forward.push_back(nxt);
      prev = cur;
      cur = nxt;
    }
    if (!closed) {
      std::vector<int> backward;
      for (int prev = b, cur = a;;) {
        const int nxt = walker.step(prev, cur);
        if (nxt < 0) break;
        if (!visited.insert(edge_key(cur, nxt)).second) break;
        backward.push_back(nxt);
        prev = cur;
        cur = nxt;
      }
      std::reverse(backward.begin(), backward.end());
      line.vertices = std::move(backward);
    }
    line.vertices.insert(line.vertices.end(), forward.begin(), forward.end());
    line.closed = closed;
    out.polylines.push_back(std::move(line));
  }

  // Face strips: one visit flag per (face, axis).
  const int nf = mesh.face_count();
  std::vector<char> seen(2 * static_cast<std::size_t>(nf), 0);
  auto crossable = [&](int he) {
    return !mesh.is_boundary_halfedge(he) && !mesh.is_singular(mesh.from(he)) &&
           !mesh.is_singular(mesh.to(he));
  };
  for (int f = 0; f < nf; ++f) {
    for (int axis = 0; axis < 2; ++axis) {
      if (seen[2 * f + axis]) continue;
      seen[2 * f + axis] = 1;
      FaceStrip strip;
      std::vector<int> forward{f};
      bool closed = false;
      // leave f through edge `axis`, keep going through the opposite edge
      for (int he = 4 * f + axis; crossable(he);) {
        const int o = mesh.opposite(he);
        const int g = QuadMesh::face_of(o);
        if (g == f && QuadMesh::corner_of(o) % 2 == axis % 2) {
          closed = true;
          break;
        }
        const int gaxis = QuadMesh::corner_of(o) % 2;
        if (seen[2 * g + gaxis]) break;
        seen[2 * g + gaxis] = 1;
        forward.push_back(g);
        he = QuadMesh::across(o);
      }
      std::vector<int> backward;
      if (!closed) {
        for (int he = 4 * f + axis + 2; crossable(he);) {
          const int o = mesh.opposite(he);
          const int g = QuadMesh::face_of(o);
          const int gaxis = QuadMesh::corner_of(o) % 2;
          if (seen[2 * g + gaxis]) break;
          seen[2 * g + gaxis] = 1;
          backward.push_back(g);
          he = QuadMesh::across(o);
        }
      }
      std::reverse(backward.begin(), backward.end());
      strip.faces = std::move(backward);
      strip.faces.insert(strip.faces.end(), forward.begin(), forward.end());
      strip.closed = closed;
      out.strips.push_back(std::move(strip));
    }
  }
  return out;
}

}  // namespace devquad
