#include "devquad/gauss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace devquad {

GaussImage gauss_image(const QuadMesh& mesh, const State& state) {
  GaussImage img;
  const int nf = mesh.face_count();
  img.points.reserve(nf);
  for (int f = 0; f < nf; ++f) img.points.push_back(state.normal(f).normalized());

  double gap = 0.0;
  int edges = 0;
  for (int h = 0; h < mesh.halfedge_count(); ++h) {
    const int o = mesh.opposite(h);
    if (o < 0 || o < h) continue;
    const int f = QuadMesh::face_of(h), g = QuadMesh::face_of(o);
    img.segments.push_back({f, g});
    gap += (img.points[f] - img.points[g]).norm();
    ++edges;
  }

  img.degeneracy.assign(nf, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> values;
  for (int f = 0; f < nf; ++f) {
    if (!mesh.is_interior_face(f)) continue;
    std::array<Vec3, 4> n;
    for (int i = 0; i < 4; ++i) n[i] = img.points[mesh.neighbor(4 * f + i)];
    const double d = std::abs((n[1] - n[3]).cross(n[0] - n[2]).dot(img.points[f]));
    img.degeneracy[f] = d;
    values.push_back(d);
  }

  GaussStats& s = img.stats;
  s.faces = static_cast<int>(values.size());
  s.mean_gap = edges ? gap / edges : 0.0;
  if (!values.empty()) {
    double sum = 0.0;
    for (double v : values) {
      sum += v;
      s.max = std::max(s.max, v);
    }
    s.mean = sum / values.size();
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size() / 2;
    s.median = sorted.size() % 2 ? sorted[m] : 0.5 * (sorted[m - 1] + sorted[m]);
  }
  return img;
}

GaussImage gauss_image(const QuadMesh& mesh) { return gauss_image(mesh, initial_state(mesh)); }

void write_gauss_obj(const GaussImage& image, std::ostream& out) {
  out.precision(17);
  for (const Vec3& p : image.points) out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  for (const auto& s : image.segments) out << "l " << s[0] + 1 << ' ' << s[1] + 1 << '\n';
}

}  // namespace devquad
