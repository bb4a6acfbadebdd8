#include "devquad/growth.hpp"

#include <algorithm>

#include "devquad/error.hpp"
#include "devquad/polylines.hpp"
#include "devquad/residuals.hpp"

namespace devquad {

QuadMesh GridPatch::mesh() const {
  return make_grid(rows, cols, false, [&](int i, int j) { return at(i, j); });
}

GridPatch extend_patch(const GridPatch& p, const GrowSides& sides) {
  const int r0 = sides.first_row ? 1 : 0, r1 = sides.last_row ? 1 : 0;
  const int c0 = sides.first_col ? 1 : 0, c1 = sides.last_col ? 1 : 0;
  GridPatch out;
  out.rows = p.rows + r0 + r1;
  out.cols = p.cols + c0 + c1;
  out.points.assign(static_cast<std::size_t>(out.rows) * out.cols, Vec3::Zero());
  auto at = [&](int i, int j) -> Vec3& { return out.points[static_cast<std::size_t>(i) * out.cols + j]; };
  for (int i = 0; i < p.rows; ++i)
    for (int j = 0; j < p.cols; ++j) at(i + r0, j + c0) = p.at(i, j);
  for (int j = c0; j < c0 + p.cols; ++j) {
    if (r0) at(0, j) = 2.0 * at(1, j) - at(2, j);
    if (r1) at(out.rows - 1, j) = 2.0 * at(out.rows - 2, j) - at(out.rows - 3, j);
  }
  for (int i = 0; i < out.rows; ++i) {
    if (c0) at(i, 0) = 2.0 * at(i, 1) - at(i, 2);
    if (c1) at(i, out.cols - 1) = 2.0 * at(i, out.cols - 2) - at(i, out.cols - 3);
  }
  return out;
}

double max_deviation(const ReferenceSurface& reference, const std::vector<Vec3>& points) {
  double d = 0.0;
  for (const Vec3& p : points) d = std::max(d, reference.closest_point(p).distance);
  return d;
}

namespace {

GridPatch optimize_patch(const GridPatch& patch, const std::shared_ptr<const ReferenceSurface>& ref,
                         const GrowOptions& options) {
  const QuadMesh mesh = patch.mesh();
  auto layout = std::make_shared<const VariableLayout>(mesh);

  Problem soft(mesh, layout);
  std::vector<std::array<int, 3>> triples;
  for (const auto& pl : trace_polylines(mesh).polylines)
    for (const auto& t : consecutive_triples(pl.vertices, pl.closed)) triples.push_back(t);
  soft.emplace<VertexFairnessBlock>(std::move(triples), options.fair_weight);
  soft.emplace<ProxBlock>(mesh, ref, 0.01, options.pos_weight);

  Problem hard(mesh, layout);
  hard.emplace<NormalBlock>(mesh);
  hard.emplace<RulingBlock>(mesh);
  hard.emplace<DevBlock>(mesh, DevForm::Vector);

  const ProjectionResult res = constrained_minimize(soft, hard, initial_state(mesh, layout), options.projection);
  GridPatch out = patch;
  out.points = res.state.positions();
  return out;
}

}  // namespace

GrowResult grow_patch(const GridPatch& seed, std::shared_ptr<const ReferenceSurface> reference,
                      const GrowOptions& options) {
  if (seed.rows < 2 || seed.cols < 2 ||
      static_cast<int>(seed.points.size()) != seed.rows * seed.cols)
    throw Error(ErrorCode::DegenerateInput, "seed patch must be a grid of at least 2 x 2 vertices");
  if (!reference || reference->empty())
    throw Error(ErrorCode::EmptyReference, "growth needs a reference surface");

  GrowResult result;
  result.patch = seed;
  result.deviation = max_deviation(*reference, seed.points);
  const GrowSides& s = options.sides;
  if (!(s.first_row || s.last_row || s.first_col || s.last_col)) return result;

  for (int ring = 0; ring < options.max_rings; ++ring) {
    GridPatch grown = extend_patch(result.patch, s);
    grown = optimize_patch(grown, reference, options);
    const double dev = max_deviation(*reference, grown.points);
    if (dev > options.tolerance) {
      result.rejected_deviation = dev;
      break;
    }
    result.patch = std::move(grown);
    result.deviation = dev;
    result.rings = ring + 1;
  }
  return result;
}

}  // namespace devquad
