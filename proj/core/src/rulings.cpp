#include "devquad/rulings.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace devquad {

namespace {

// Next boundary halfedge along the boundary loop.
int next_boundary(const QuadMesh& mesh, int h) {
  int g = QuadMesh::next(h);
  for (int guard = 0; !mesh.is_boundary_halfedge(g) && guard < mesh.halfedge_count(); ++guard)
    g = QuadMesh::next(mesh.opposite(g));
  return g;
}

}  // namespace

RulingLineField ruling_field(const QuadMesh& mesh, const State& state, const RulingOptions& options) {
  RulingLineField field;
  std::vector<int> line_of(mesh.halfedge_count(), -1);
  for (int h = 0; h < mesh.halfedge_count(); ++h) {
    const int o = mesh.opposite(h);
    if (o < 0 || o < h) continue;
    RulingLine line;
    line.halfedge = h;
    line.anchor = 0.5 * (state.position(mesh.from(h)) + state.position(mesh.to(h)));
    line.direction = state.normal(QuadMesh::face_of(h)).cross(state.normal(QuadMesh::face_of(o)));
    line.zero = line.direction.norm() < options.zero_tolerance;
    line_of[h] = line_of[o] = static_cast<int>(field.lines.size());
    field.lines.push_back(line);
  }

  const double cos_limit = std::cos(options.tangency_angle_deg * std::numbers::pi / 180.0);
  std::vector<char> flagged(mesh.halfedge_count(), 0);
  for (int h = 0; h < mesh.halfedge_count(); ++h) {
    if (!mesh.is_boundary_halfedge(h)) continue;
    const Vec3 t = state.position(mesh.to(h)) - state.position(mesh.from(h));
    if (t.norm() == 0.0) continue;
    int seen = 0;
    bool tangent = true;
    for (int side : {QuadMesh::next(h), QuadMesh::prev(h)}) {
      if (line_of[side] < 0) continue;
      const RulingLine& line = field.lines[line_of[side]];
      if (line.zero) {
        tangent = false;
        continue;
      }
      ++seen;
      const double c = std::abs(line.direction.dot(t)) / (line.direction.norm() * t.norm());
      if (c < cos_limit) tangent = false;
    }
    if (seen > 0 && tangent) {
      flagged[h] = 1;
      field.flagged_boundary_halfedges.push_back(h);
    }
  }

  // group flagged halfedges into runs along each boundary loop
  std::vector<char> visited(mesh.halfedge_count(), 0);
  for (int h : field.flagged_boundary_halfedges) {
    if (visited[h]) continue;
    int start = h;
    // walk back to the start of the run (bounded for closed loops)
    for (int guard = 0; guard < mesh.halfedge_count(); ++guard) {
      int p = QuadMesh::prev(start);
      for (int g = 0; !mesh.is_boundary_halfedge(p) && g < mesh.halfedge_count(); ++g)
        p = QuadMesh::prev(mesh.opposite(p));
      if (!flagged[p] || p == h) break;
      start = p;
    }
    TangencyRun run;
    for (int g = start; flagged[g] && !visited[g]; g = next_boundary(mesh, g)) {
      visited[g] = 1;
      run.halfedges.push_back(g);
    }
    if (static_cast<int>(run.halfedges.size()) >= options.min_run) field.warnings.push_back(run);
  }
  return field;
}

RulingLineField prospective_rulings(const QuadMesh& mesh, const RulingOptions& options) {
  return ruling_field(mesh, initial_state(mesh), options);
}

void write_ruling_obj(const RulingLineField& field, double scale, std::ostream& out) {
  out.precision(17);
  int count = 0;
  for (const RulingLine& line : field.lines) {
    if (line.zero) continue;
    const Vec3 d = scale * line.direction.normalized();
    const Vec3 a = line.anchor - d, b = line.anchor + d;
    out << "v " << a.x() << ' ' << a.y() << ' ' << a.z() << '\n';
    out << "v " << b.x() << ' ' << b.y() << ' ' << b.z() << '\n';
    ++count;
  }
  for (int i = 0; i < count; ++i) out << "l " << 2 * i + 1 << ' ' << 2 * i + 2 << '\n';
}

}  // namespace devquad
