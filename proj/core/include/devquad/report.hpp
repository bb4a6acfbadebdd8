#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "devquad/gauss.hpp"
#include "devquad/problem.hpp"

namespace devquad {

struct ValidationReport {
  int faces = 0;
  int interior_faces = 0;
  // Per face |dev|^2 (vector form) and det^2; NaN for boundary faces.
  std::vector<double> dev_vector;
  std::vector<double> dev_det;
  double dev_total = 0.0;
  double dev_total_det = 0.0;
  double dev_per_face = 0.0;      // dev_total / interior_faces
  double dev_per_face_det = 0.0;
  double dev_median = 0.0;        // of the per-face vector values
  double dev_max = 0.0;
  // Same measure from the optimizer's own normal and ruling variables.
  double dev_total_state = 0.0;
  FamilyEnergies block_energies{};  // unweighted, from the problem if given
  GaussStats gauss;
  double boundary_drift = 0.0;  // max move of fixed vertices
  int iterations = 0;
  double seconds = 0.0;
  std::string status;
};

// Normals and rulings are re-derived from the vertex positions.
ValidationReport validate(const QuadMesh& mesh);
// Also fills the state-based measure and, if `problem` is given, its family
// energies. `original` holds the positions before optimization for drift.
ValidationReport validate(const QuadMesh& mesh, const State& state, const Problem* problem,
                          std::span<const Vec3> original = {});

// Per-face E_dev (vector form, squared norm) from re-derived normals.
std::vector<double> face_dev_energies(const QuadMesh& mesh);

void write_report_csv(const ValidationReport& report, std::ostream& out);

}  // namespace devquad
