#pragma once

#include <Eigen/Core>

#include "devquad/problem.hpp"
#include "devquad/solver.hpp"

namespace devquad {

struct ProjectionConfig {
  double mu = 1.0;               // trade-off in the soft step C + mu*E
  int soft_iterations = 5;       // LM cap for the soft step
  double gram_regularizer = 1e-12;  // relative to the mean Gram diagonal
  double improvement_tolerance = 1e-6;  // relative decrease of E to keep looping
  int max_outer_iterations = 50;
  double constraint_tolerance = 1e-7;  // max |row| of C ending the re-projection
  int constraint_iterations = 50;
  int dense_gram_limit = 2000;
};

struct TangentReport {
  double max_violation = 0.0;  // max_i |<h', g_i>| / (|h'| |g_i|)
  bool dense = true;
  bool well_conditioned = true;
};

// h' = h + G^T lambda with (G G^T) lambda = -G h, where the rows of G are
// the constraint gradients. h' is orthogonal to every row of G.
Eigen::VectorXd project_tangent(const Eigen::VectorXd& h, const SparseMatrix& gradients,
                                const ProjectionConfig& config = {}, TangentReport* report = nullptr);

struct OuterStep {
  double soft_energy = 0.0;        // E after the accepted outer iteration
  double max_constraint_row = 0.0; // max |c_j| at the same point
  double tangent_violation = 0.0;
};

enum class ProjectionStatus { Converged, NoProgress, MaxIterations };

struct ProjectionResult {
  State state;
  std::vector<OuterStep> outer;  // entry 0 is the starting point
  ProjectionStatus status = ProjectionStatus::NoProgress;
};

// Minimizes E subject to C = 0 by soft step, tangent projection and
// re-projection onto C = 0, repeated while E keeps improving. `soft` and
// `constraints` must share one mesh and variable layout. A start point off
// the manifold is first projected onto it.
ProjectionResult constrained_minimize(Problem& soft, Problem& constraints, State state,
                                      const ProjectionConfig& config);

double max_abs_row(const Problem& problem, const State& state);

}  // namespace devquad
