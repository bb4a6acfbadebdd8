#include "devquad/loft.hpp"

#include <algorithm>

#include "devquad/error.hpp"

namespace devquad {

double Polyline3::length() const {
  double len = 0.0;
  const std::size_t n = points.size();
  for (std::size_t i = 1; i < n; ++i) len += (points[i] - points[i - 1]).norm();
  if (closed && n > 1) len += (points.front() - points.back()).norm();
  return len;
}

std::vector<Vec3> resample_arc_length(const Polyline3& curve, int count) {
  const auto& p = curve.points;
  const double total = curve.length();
  if (p.size() < 2 || count < 2 || !(total > 0.0))
    throw Error(ErrorCode::CountMismatch, "curve cannot be resampled");

  std::vector<Vec3> pts = p;
  if (curve.closed) pts.push_back(p.front());
  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) cum[i] = cum[i - 1] + (pts[i] - pts[i - 1]).norm();

  std::vector<Vec3> out;
  out.reserve(count);
  const int steps = curve.closed ? count : count - 1;
  std::size_t seg = 0;
  for (int k = 0; k < count; ++k) {
    if (!curve.closed && k == count - 1) {
      out.push_back(pts.back());
      break;
    }
    const double s = total * k / steps;
    while (seg + 2 < pts.size() && cum[seg + 1] < s) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double t = len > 0.0 ? std::clamp((s - cum[seg]) / len, 0.0, 1.0) : 0.0;
    out.push_back((1.0 - t) * pts[seg] + t * pts[seg + 1]);
  }
  return out;
}

QuadMesh loft_init(const Polyline3& a, const Polyline3& b, const LoftOptions& options) {
  if (options.rows < 4) throw Error(ErrorCode::CountMismatch, "lofting needs at least 4 rows");
  if (a.closed != b.closed)
    throw Error(ErrorCode::CountMismatch, "cannot loft an open curve against a closed one");

  std::vector<Vec3> ca, cb;
  const int na = static_cast<int>(a.points.size()), nb = static_cast<int>(b.points.size());
  if (options.samples == 0 && na == nb) {
    ca = a.points;
    cb = b.points;
  } else {
    const int n = options.samples > 0 ? options.samples : std::max(na, nb);
    ca = resample_arc_length(a, n);
    cb = resample_arc_length(b, n);
  }
  const int n = static_cast<int>(ca.size());
  if (n < (a.closed ? 3 : 2) || static_cast<int>(cb.size()) != n)
    throw Error(ErrorCode::CountMismatch, "curves resample to different counts");

  double gap = 0.0, scale = 0.0;
  for (int j = 0; j < n; ++j) {
    gap = std::max(gap, (ca[j] - cb[j]).norm());
    scale = std::max({scale, ca[j].norm(), cb[j].norm()});
  }
  if (!(gap > 1e-12 * std::max(scale, 1.0)))
    throw Error(ErrorCode::DegenerateInput, "the two curves coincide");

  const int rows = options.rows;
  QuadMesh mesh = make_grid(rows, n, a.closed, [&](int i, int j) -> Vec3 {
    if (i == 0) return ca[j];
    if (i == rows - 1) return cb[j];
    const double t = static_cast<double>(i) / (rows - 1);
    return (1.0 - t) * ca[j] + t * cb[j];
  });
  for (int j = 0; j < n; ++j) {
    mesh.set_fixed(j, true);
    mesh.set_fixed((rows - 1) * n + j, true);
  }
  return mesh;
}

}  // namespace devquad
