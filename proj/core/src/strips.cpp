#include "devquad/strips.hpp"

#include <algorithm>
#include <cstdint>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "devquad/error.hpp"

namespace devquad {

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

int run_length(const QuadMesh& mesh, int f, int axis, const std::vector<int>& label,
               const std::vector<char>& cut) {
  int count = 1;
  for (int start : {axis, axis + 2}) {
    int he = 4 * f + start;
    for (int guard = 0; guard < mesh.face_count(); ++guard) {
      if (mesh.is_boundary_halfedge(he) || cut[he]) break;
      const int o = mesh.opposite(he);
      const int g = QuadMesh::face_of(o);
      if (g == f || label[g] != label[f]) break;
      ++count;
      he = QuadMesh::across(o);
    }
  }
  return count;
}

}  // namespace

int strip_width(const QuadMesh& mesh, const std::vector<int>& faces,
                const std::vector<char>& cut_halfedge) {
  std::vector<int> label(mesh.face_count(), -1);
  for (int f : faces) label[f] = 0;
  int width = mesh.face_count();
  for (int f : faces) {
    const int a = run_length(mesh, f, 0, label, cut_halfedge);
    const int b = run_length(mesh, f, 1, label, cut_halfedge);
    width = std::min(width, std::min(a, b));
  }
  return faces.empty() ? 0 : width;
}

StripDecomposition decompose_strips(const QuadMesh& mesh, const PolylineSet& lines,
                                    const std::vector<int>& polyline_ids, int min_width) {
  std::unordered_set<std::uint64_t> cut_edges;
  std::vector<char> on_cut(mesh.vertex_count(), 0);
  for (int id : polyline_ids) {
    if (id < 0 || id >= static_cast<int>(lines.polylines.size()))
      throw Error(ErrorCode::InvalidIndex, "unknown polyline id", {id});
    const auto& pl = lines.polylines[id];
    const auto& v = pl.vertices;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) cut_edges.insert(edge_key(v[i], v[i + 1]));
    if (pl.closed && v.size() > 2) cut_edges.insert(edge_key(v.back(), v.front()));
    for (int x : v) on_cut[x] = 1;
  }

  std::vector<char> cut(mesh.halfedge_count(), 0);
  for (int h = 0; h < mesh.halfedge_count(); ++h)
    cut[h] = cut_edges.count(edge_key(mesh.from(h), mesh.to(h))) ? 1 : 0;

  // flood fill faces without crossing cut edges
  std::vector<int> label(mesh.face_count(), -1);
  int count = 0;
  for (int seed = 0; seed < mesh.face_count(); ++seed) {
    if (label[seed] >= 0) continue;
    std::queue<int> q;
    q.push(seed);
    label[seed] = count;
    while (!q.empty()) {
      const int f = q.front();
      q.pop();
      for (int i = 0; i < 4; ++i) {
        const int h = 4 * f + i;
        const int g = mesh.neighbor(h);
        if (g < 0 || cut[h] || label[g] >= 0) continue;
        label[g] = count;
        q.push(g);
      }
    }
    ++count;
  }

  for (int id : polyline_ids) {
    const auto& v = lines.polylines[id].vertices;
    bool interior = false;
    for (int h = 0; h < mesh.halfedge_count(); ++h) {
      if (!cut[h] || mesh.is_boundary_halfedge(h)) continue;
      const bool mine = std::find(v.begin(), v.end(), mesh.from(h)) != v.end() &&
                        std::find(v.begin(), v.end(), mesh.to(h)) != v.end();
      if (!mine) continue;
      interior = true;
      if (label[QuadMesh::face_of(h)] == label[mesh.neighbor(h)])
        throw Error(ErrorCode::NonSeparating, "polyline does not separate the mesh", {id});
    }
    if (!interior) throw Error(ErrorCode::NonSeparating, "polyline runs along the boundary", {id});
  }

  StripDecomposition out;
  out.cut_polylines = polyline_ids;
  out.strips.resize(count);
  for (int f = 0; f < mesh.face_count(); ++f) out.strips[label[f]].faces.push_back(f);
  for (int s = 0; s < count; ++s) {
    Strip& strip = out.strips[s];
    std::vector<char> seen(mesh.vertex_count(), 0);
    for (int f : strip.faces)
      for (int v : mesh.face(f))
        if (!seen[v]) {
          seen[v] = 1;
          if (on_cut[v] || mesh.is_fixed(v)) strip.fixed_vertices.push_back(v);
        }
    std::sort(strip.fixed_vertices.begin(), strip.fixed_vertices.end());
    const int width = strip_width(mesh, strip.faces, cut);
    if (width < min_width)
      throw Error(ErrorCode::StripTooNarrow,
                  "strip is " + std::to_string(width) + " faces wide", {s});
  }
  return out;
}

SubMesh extract_strip(const QuadMesh& mesh, const Strip& strip) {
  SubMesh out;
  std::unordered_map<int, int> local;
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  for (int f : strip.faces) {
    Face q;
    for (int i = 0; i < 4; ++i) {
      const int v = mesh.face(f)[i];
      auto [it, inserted] = local.emplace(v, static_cast<int>(verts.size()));
      if (inserted) {
        verts.push_back(mesh.vertex(v));
        out.parent_vertex.push_back(v);
      }
      q[i] = it->second;
    }
    faces.push_back(q);
    out.parent_face.push_back(f);
  }
  out.mesh = QuadMesh(std::move(verts), std::move(faces));
  for (int v : strip.fixed_vertices) {
    auto it = local.find(v);
    if (it != local.end()) out.mesh.set_fixed(it->second, true);
  }
  return out;
}

}  // namespace devquad
