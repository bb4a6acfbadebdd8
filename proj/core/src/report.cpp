#include "devquad/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace devquad {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void fill_dev(const QuadMesh& mesh, const State& s, ValidationReport& r) {
  r.faces = mesh.face_count();
  r.dev_vector.assign(r.faces, kNaN);
  r.dev_det.assign(r.faces, kNaN);
  std::vector<double> values;
  for (int f = 0; f < r.faces; ++f) {
    if (!mesh.is_interior_face(f)) continue;
    std::array<Vec3, 4> rr;
    for (int i = 0; i < 4; ++i) rr[i] = s.ruling(4 * f + i);
    const double v = dev_residual(rr).squaredNorm();
    const double d = dev_residual_det(rr, s.normal(f));
    r.dev_vector[f] = v;
    r.dev_det[f] = d * d;
    r.dev_total += v;
    r.dev_total_det += d * d;
    values.push_back(v);
  }
  r.interior_faces = static_cast<int>(values.size());
  if (r.interior_faces > 0) {
    r.dev_per_face = r.dev_total / r.interior_faces;
    r.dev_per_face_det = r.dev_total_det / r.interior_faces;
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size() / 2;
    r.dev_median = values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
    r.dev_max = values.back();
  }
}

double state_dev_total(const QuadMesh& mesh, const State& s) {
  double total = 0.0;
  for (int f = 0; f < mesh.face_count(); ++f) {
    if (!mesh.is_interior_face(f)) continue;
    std::array<Vec3, 4> rr;
    for (int i = 0; i < 4; ++i) rr[i] = s.ruling(4 * f + i);
    total += dev_residual(rr).squaredNorm();
  }
  return total;
}

}  // namespace

std::vector<double> face_dev_energies(const QuadMesh& mesh) {
  ValidationReport r;
  fill_dev(mesh, initial_state(mesh), r);
  return r.dev_vector;
}

ValidationReport validate(const QuadMesh& mesh) {
  ValidationReport r;
  const State derived = initial_state(mesh);
  fill_dev(mesh, derived, r);
  r.dev_total_state = r.dev_total;
  r.gauss = gauss_image(mesh, derived).stats;
  return r;
}

ValidationReport validate(const QuadMesh& mesh, const State& state, const Problem* problem,
                          std::span<const Vec3> original) {
  QuadMesh current = mesh;
  current.set_vertices(state.positions());
  ValidationReport r = validate(current);
  r.dev_total_state = state_dev_total(mesh, state);
  if (problem) r.block_energies = problem->raw_energies(state);
  if (static_cast<int>(original.size()) == mesh.vertex_count())
    for (int v = 0; v < mesh.vertex_count(); ++v)
      if (mesh.is_fixed(v))
        r.boundary_drift = std::max(r.boundary_drift, (state.position(v) - original[v]).norm());
  return r;
}

void write_report_csv(const ValidationReport& r, std::ostream& out) {
  out.precision(17);
  out << "metric,value\n";
  out << "status," << r.status << '\n';
  out << "faces," << r.faces << '\n';
  out << "interior_faces," << r.interior_faces << '\n';
  out << "dev_total," << r.dev_total << '\n';
  out << "dev_per_face," << r.dev_per_face << '\n';
  out << "dev_total_det," << r.dev_total_det << '\n';
  out << "dev_per_face_det," << r.dev_per_face_det << '\n';
  out << "dev_median," << r.dev_median << '\n';
  out << "dev_max," << r.dev_max << '\n';
  out << "dev_total_state," << r.dev_total_state << '\n';
  for (int k = 0; k < kFamilyCount; ++k)
    out << "energy_" << family_name(static_cast<Family>(k)) << ',' << r.block_energies[k] << '\n';
  out << "gauss_max," << r.gauss.max << '\n';
  out << "gauss_median," << r.gauss.median << '\n';
  out << "gauss_mean," << r.gauss.mean << '\n';
  out << "gauss_mean_gap," << r.gauss.mean_gap << '\n';
  out << "boundary_drift," << r.boundary_drift << '\n';
  out << "iterations," << r.iterations << '\n';
  out << "seconds," << r.seconds << '\n';
  out << "\nface,dev_vector,dev_det\n";
  for (int f = 0; f < r.faces; ++f) out << f << ',' << r.dev_vector[f] << ',' << r.dev_det[f] << '\n';
}

}  // namespace devquad
