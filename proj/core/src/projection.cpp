#include "devquad/projection.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "devquad/error.hpp"

namespace devquad {

Eigen::VectorXd project_tangent(const Eigen::VectorXd& h, const SparseMatrix& g,
                                const ProjectionConfig& config, TangentReport* report) {
  const int n = static_cast<int>(g.rows());
  Eigen::VectorXd out = h;
  TangentReport rep;
  if (n == 0) {
    if (report) *report = rep;
    return out;
  }
  const SparseMatrix gram = g * g.transpose();
  double trace = 0.0;
  for (int i = 0; i < n; ++i) trace += gram.coeff(i, i);
  const double eps = config.gram_regularizer * (trace > 0 ? trace / n : 1.0);

  // Two rounds of refinement recover orthogonality lost to the regularizer.
  rep.dense = n <= config.dense_gram_limit;
  if (rep.dense) {
    Eigen::MatrixXd dense = Eigen::MatrixXd(gram);
    dense.diagonal().array() += eps;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(dense);
    if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::GramSingular, "Gram system failed");
    for (int round = 0; round < 3; ++round) {
      const Eigen::VectorXd rhs = -(g * out);
      out += g.transpose() * ldlt.solve(rhs);
    }
  } else {
    SparseMatrix reg = gram;
    SparseMatrix id(n, n);
    id.setIdentity();
    reg = reg + eps * id;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(reg);
    if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::GramSingular, "Gram system failed");
    for (int round = 0; round < 3; ++round) {
      const Eigen::VectorXd rhs = -(g * out);
      out += g.transpose() * ldlt.solve(rhs);
    }
  }

  const Eigen::VectorXd dots = g * out;
  const double hn = out.norm();
  for (int i = 0; i < n; ++i) {
    const double gn = g.row(i).norm();
    if (gn == 0.0 || hn == 0.0) continue;
    rep.max_violation = std::max(rep.max_violation, std::abs(dots[i]) / (gn * hn));
  }
  rep.well_conditioned = rep.max_violation <= 1e-10;
  if (report) *report = rep;
  return out;
}

double max_abs_row(const Problem& problem, const State& state) {
  Eigen::VectorXd r;
  problem.evaluate(state, r, nullptr);
  return r.size() ? r.lpNorm<Eigen::Infinity>() : 0.0;
}

namespace {

SolverConfig constraint_solver(const ProjectionConfig& config, bool refresh_normals) {
  SolverConfig c;
  c.max_iterations = config.constraint_iterations;
  c.energy_threshold = config.constraint_tolerance * config.constraint_tolerance;
  c.zero_regularizers_on_stagnation = false;
  c.refresh_normals = refresh_normals;
  return c;
}

}  // namespace

ProjectionResult constrained_minimize(Problem& soft, Problem& constraints, State state,
                                      const ProjectionConfig& config) {
  if (!(config.mu > 0.0)) throw Error(ErrorCode::InvalidConfig, "mu must be positive");
  if (soft.layout() != constraints.layout())
    throw Error(ErrorCode::InvalidConfig, "soft and constraint problems need one layout");

  // C + mu * E over the same blocks
  Problem combined(constraints.mesh(), constraints.layout());
  for (const auto& e : constraints.entries()) combined.add(e.block, e.scale);
  for (const auto& e : soft.entries()) combined.add(e.block, e.scale * config.mu);

  const SolverConfig project_cfg = constraint_solver(config, false);
  SolverConfig soft_cfg;
  soft_cfg.max_iterations = config.soft_iterations;
  soft_cfg.zero_regularizers_on_stagnation = false;
  soft_cfg.refresh_normals = false;

  ProjectionResult result;
  const double limit = 10.0 * config.constraint_tolerance;

  if (max_abs_row(constraints, state) > config.constraint_tolerance)
    state = lm_minimize(constraints, std::move(state), project_cfg).state;
  soft.refresh(state, false);
  double energy = soft.energy(state);
  result.outer.push_back({energy, max_abs_row(constraints, state), 0.0});

  result.status = ProjectionStatus::MaxIterations;
  for (int outer = 0; outer < config.max_outer_iterations; ++outer) {
    // (1) soft step from x
    const LmResult step = lm_minimize(combined, state, soft_cfg);
    const Eigen::VectorXd h = combined.gather(step.state) - combined.gather(state);

    // (2) tangent projection at x
    Eigen::VectorXd rows;
    SparseMatrix grads;
    constraints.evaluate(state, rows, &grads);
    TangentReport rep;
    const Eigen::VectorXd hp = project_tangent(h, grads, config, &rep);

    // (3) back onto C = 0 from x + h'
    State moved = state;
    constraints.apply_step(moved, hp);
    State projected = lm_minimize(constraints, std::move(moved), project_cfg).state;

    // (4) keep it only if E improved on the manifold
    soft.refresh(projected, true);
    const double e_new = soft.energy(projected);
    const double c_new = max_abs_row(constraints, projected);
    if (!(c_new <= limit) || !(e_new < energy * (1.0 - config.improvement_tolerance))) {
      soft.refresh(state, false);
      result.status = outer == 0 && h.norm() == 0.0 ? ProjectionStatus::Converged
                                                     : ProjectionStatus::NoProgress;
      break;
    }
    state = std::move(projected);
    energy = e_new;
    result.outer.push_back({energy, c_new, rep.max_violation});
  }
  result.state = std::move(state);
  return result;
}

}  // namespace devquad
