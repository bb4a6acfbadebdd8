#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "devquad/config.hpp"
#include "devquad/projection.hpp"
#include "devquad/reference.hpp"
#include "devquad/report.hpp"
#include "devquad/solver.hpp"
#include "devquad/strips.hpp"

namespace devquad {

// Geometry a job needs beyond the mesh, already loaded.
struct ProblemInputs {
  std::vector<Vec3> glide_cloud;
  std::shared_ptr<const ReferenceSurface> reference;  // adds proximity rows
  std::vector<Vec3> iso_reference;  // elastic mode target; empty: the mesh itself
};

// A mesh with the residual system a job config asks for. The mesh lives at a
// stable address for the lifetime of the object.
class StandardProblem {
 public:
  StandardProblem(QuadMesh mesh, const JobConfig& config, const ProblemInputs& inputs = {});

  QuadMesh& mesh() { return *mesh_; }
  const QuadMesh& mesh() const { return *mesh_; }
  Problem& problem() { return *problem_; }
  const std::vector<Vec3>& original() const { return original_; }
  State initial_state() const;

  HandleBlock* handles() const { return handles_.get(); }
  GlideBlock* glide() const { return glide_.get(); }
  IsometryBlock* isometry() const { return iso_.get(); }

 private:
  std::unique_ptr<QuadMesh> mesh_;
  std::unique_ptr<Problem> problem_;
  std::vector<Vec3> original_;
  std::shared_ptr<HandleBlock> handles_;
  std::shared_ptr<GlideBlock> glide_;
  std::shared_ptr<IsometryBlock> iso_;
};

// Marks fix_boundary and fixed_vertices on the mesh.
void apply_fixed(QuadMesh& mesh, const JobConfig& config);

// Solver settings with the config weights as the first stage when the
// config has no explicit schedule.
SolverConfig solver_config(const JobConfig& config);

// "converged" when the per interior face E_dev is within the tolerance,
// "unreachable" otherwise.
std::string status_for(const ValidationReport& report, double tolerance);

struct OptimizeOutcome {
  QuadMesh mesh;
  LmResult lm;
  ValidationReport report;
};

OptimizeOutcome optimize(QuadMesh mesh, const JobConfig& config, const ProblemInputs& inputs = {},
                         const IterationCallback& on_iteration = {});

OptimizeOutcome loft(const Polyline3& a, const Polyline3& b, const JobConfig& config);

struct StripOutcome {
  std::vector<OuterStep> outer;
  ProjectionStatus status = ProjectionStatus::NoProgress;
  double max_constraint = 0.0;
};

struct ApproximationOutcome {
  QuadMesh mesh;
  StripDecomposition strips;
  std::vector<StripOutcome> per_strip;
  ValidationReport report;
};

JobConfig default_approximate_config();

// Cuts the mesh along config.strip_polylines (no cut: one strip), then runs
// the constrained projection for every strip as an independent parallel job.
ApproximationOutcome approximate(QuadMesh mesh, std::shared_ptr<const ReferenceSurface> reference,
                                 const JobConfig& config);

// Strip sidecar: {"strips": [{"faces": [...], "fixed": [...]}, ...]}.
void write_strips_json(const StripDecomposition& strips, std::ostream& out);
StripDecomposition read_strips_json(std::istream& in);

}  // namespace devquad
