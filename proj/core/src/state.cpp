#include "devquad/state.hpp"

#include "devquad/error.hpp"
#include "devquad/frame.hpp"

namespace devquad {

VariableLayout::VariableLayout(const QuadMesh& mesh) {
  normal_offset_ = 3 * mesh.vertex_count();
  ruling_offset_ = normal_offset_ + 3 * mesh.face_count();
  ruling_slot_.assign(mesh.halfedge_count(), -1);
  int slot = 0;
  for (int h = 0; h < mesh.halfedge_count(); ++h)
    if (!mesh.is_boundary_halfedge(h)) ruling_slot_[h] = slot++;
  size_ = ruling_offset_ + 3 * slot;
}

std::vector<Vec3> State::positions() const {
  std::vector<Vec3> out(layout->vertex_count());
  for (int v = 0; v < layout->vertex_count(); ++v) out[v] = position(v);
  return out;
}

State initial_state(const QuadMesh& mesh) {
  return initial_state(mesh, std::make_shared<const VariableLayout>(mesh));
}

State initial_state(const QuadMesh& mesh, std::shared_ptr<const VariableLayout> layout) {
  State s{std::move(layout), {}};
  s.x.setZero(s.layout->size());
  for (int v = 0; v < mesh.vertex_count(); ++v) s.set_position(v, mesh.vertex(v));
  const double tol = degenerate_tolerance(mesh.bbox_diagonal());
  for (int f = 0; f < mesh.face_count(); ++f)
    s.set_normal(f, build_frame(mesh.vertices(), mesh.face(f), tol, f).normal);
  derive_rulings(mesh, s);
  return s;
}

void orient_and_refresh_normals(const QuadMesh& mesh, State& state) {
  const std::vector<Vec3> pos = state.positions();
  Vec3 lo = pos.empty() ? Vec3::Zero() : pos.front(), hi = lo;
  for (const Vec3& p : pos) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double tol = degenerate_tolerance((hi - lo).norm());
  for (int f = 0; f < mesh.face_count(); ++f) {
    Vec3 n = build_frame(pos, mesh.face(f), tol, f).normal;
    if (n.dot(state.normal(f)) < 0.0) n = -n;
    state.set_normal(f, n);
  }
}

int align_normal_orientation(const QuadMesh& mesh, State& state) {
  const std::vector<Vec3> pos = state.positions();
  std::vector<char> flipped(mesh.face_count(), 0);
  int count = 0;
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Vec3 c = diagonal_cross(pos, mesh.face(f));
    if (c.dot(state.normal(f)) < 0.0) {
      state.set_normal(f, -state.normal(f));
      flipped[f] = 1;
      ++count;
    }
  }
  if (count == 0) return 0;
  for (int h = 0; h < mesh.halfedge_count(); ++h) {
    const int g = mesh.neighbor(h);
    if (g >= 0 && flipped[QuadMesh::face_of(h)] != flipped[g]) state.set_ruling(h, -state.ruling(h));
  }
  return count;
}

void derive_rulings(const QuadMesh& mesh, State& state) {
  for (int h = 0; h < mesh.halfedge_count(); ++h) {
    const int g = mesh.neighbor(h);
    if (g < 0) continue;
    state.set_ruling(h, state.normal(QuadMesh::face_of(h)).cross(state.normal(g)));
  }
}

}  // namespace devquad
