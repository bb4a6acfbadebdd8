#include "devquad/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <Eigen/SparseCholesky>

#include "devquad/error.hpp"

namespace devquad {

double weight_for(const Weights& w, Family family) {
  switch (family) {
    case Family::Norm: return w.norm;
    case Family::Rul: return w.rul;
    case Family::Dev: return w.dev;
    case Family::FairV: return w.fair_v;
    case Family::FairN: return w.fair_n;
    case Family::Iso: return w.iso;
    case Family::Handle:
    case Family::Glide:
    case Family::Prox: return w.pos;
  }
  return 0.0;
}

void apply_weights(Problem& problem, const Weights& weights) {
  for (const auto& e : problem.entries()) e.block->set_weight(weight_for(weights, e.block->family()));
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::EnergyThreshold: return "energy-threshold";
    case Termination::Stagnation: return "stagnation";
    case Termination::MaxIterations: return "max-iterations";
    case Termination::SmallGradient: return "small-gradient";
    case Termination::SmallStep: return "small-step";
    case Termination::Cancelled: return "cancelled";
  }
  return "?";
}

bool is_stagnating(const std::vector<TraceRow>& trace, int phase_start, int window, double tolerance) {
  std::vector<double> energies;
  for (std::size_t i = static_cast<std::size_t>(std::max(phase_start, 0)); i < trace.size(); ++i)
    if (trace[i].accepted || static_cast<int>(i) == phase_start) energies.push_back(trace[i].energy);
  if (static_cast<int>(energies.size()) < window + 1) return false;
  const double old = energies[energies.size() - 1 - window];
  const double now = energies.back();
  if (!(old > 0.0)) return true;
  return (old - now) / old < tolerance;
}

ScheduleAction schedule_weights(const SolverConfig& config, const std::vector<TraceRow>& trace,
                                ScheduleState& schedule, Weights& weights) {
  const int nstages = static_cast<int>(config.stages.size());
  if (schedule.stage + 1 < nstages) {
    const int budget = config.stages[schedule.stage].iterations;
    if (budget > 0 && schedule.accepted_in_stage >= budget) {
      ++schedule.stage;
      schedule.accepted_in_stage = 0;
      weights = config.stages[schedule.stage].weights;
      return ScheduleAction::AdvanceStage;
    }
  }
  // a spent budget on the last stage ends the regularized phase
  if (schedule.stage + 1 == nstages && !schedule.regularizers_zeroed &&
      config.stages[schedule.stage].iterations > 0 &&
      schedule.accepted_in_stage >= config.stages[schedule.stage].iterations &&
      weights.has_regularizers()) {
    weights.fair_v = weights.fair_n = weights.iso = 0.0;
    schedule.regularizers_zeroed = true;
    return ScheduleAction::ZeroRegularizers;
  }
  if (!is_stagnating(trace, schedule.phase_start, config.stagnation_window, config.stagnation_tolerance))
    return ScheduleAction::Continue;
  if (schedule.stage + 1 < nstages) {
    ++schedule.stage;
    schedule.accepted_in_stage = 0;
    weights = config.stages[schedule.stage].weights;
    return ScheduleAction::AdvanceStage;
  }
  if (config.zero_regularizers_on_stagnation && !schedule.regularizers_zeroed &&
      weights.has_regularizers()) {
    weights.fair_v = weights.fair_n = weights.iso = 0.0;
    schedule.regularizers_zeroed = true;
    return ScheduleAction::ZeroRegularizers;
  }
  return ScheduleAction::Terminate;
}

namespace {

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

Weights weights_of(const Problem& p) {
  Weights w{0, 0, 0, 0, 0, 0, 0};
  for (const auto& e : p.entries()) {
    const double x = e.block->weight();
    switch (e.block->family()) {
      case Family::Norm: w.norm = x; break;
      case Family::Rul: w.rul = x; break;
      case Family::Dev: w.dev = x; break;
      case Family::FairV: w.fair_v = x; break;
      case Family::FairN: w.fair_n = x; break;
      case Family::Iso: w.iso = x; break;
      default: w.pos = x; break;
    }
  }
  return w;
}

class DampedSystem {
 public:
  // Solves (J^T J + mu I) h = -J^T r. Re-analyzes when the pattern changes.
  bool solve(const SparseMatrix& jtj, const Eigen::VectorXd& g, double mu, Eigen::VectorXd& h) {
    const int n = static_cast<int>(jtj.rows());
    SparseMatrix id(n, n);
    id.setIdentity();
    SparseMatrix m = jtj + mu * id;
    m.makeCompressed();
    if (!analyzed_ || n != size_ || m.nonZeros() != nnz_) {
      solver_.analyzePattern(m);
      analyzed_ = true;
      size_ = n;
      nnz_ = m.nonZeros();
    }
    solver_.factorize(m);
    if (solver_.info() != Eigen::Success) return false;
    h = solver_.solve(-g);
    return solver_.info() == Eigen::Success && h.allFinite();
  }
  void reset() { analyzed_ = false; }

 private:
  Eigen::SimplicialLDLT<SparseMatrix> solver_;
  bool analyzed_ = false;
  int size_ = 0;
  Eigen::Index nnz_ = 0;
};

}  // namespace

LmResult lm_minimize(Problem& problem, State state, const SolverConfig& config,
                     const IterationCallback& on_iteration) {
  if (!(config.damping > 0.0))
    throw Error(ErrorCode::InvalidConfig, "damping must be positive");

  LmResult result;
  Weights weights = config.stages.empty() ? weights_of(problem) : config.stages.front().weights;
  if (!config.stages.empty()) apply_weights(problem, weights);

  problem.refresh(state, false);

  Eigen::VectorXd r;
  SparseMatrix jac;
  problem.evaluate(state, r, &jac);
  if (!all_finite(r)) throw Error(ErrorCode::NonFiniteResidual, "initial residual is not finite");
  double energy = r.squaredNorm();

  ScheduleState schedule;
  auto push_row = [&](TraceRow row) {
    row.stage = schedule.stage;
    row.raw = problem.raw_energies(state);
    result.trace.push_back(std::move(row));
  };
  {
    TraceRow row;
    row.accepted = true;
    row.damping = config.damping;
    row.energy_before = row.step_energy = row.energy = energy;
    row.event = "start";
    push_row(std::move(row));
  }

  DampedSystem system;
  double mu = config.damping;
  double nu = 2.0;
  int rejections = 0;
  result.reason = Termination::MaxIterations;

  auto finish = [&](Termination why) {
    result.reason = why;
    result.state = std::move(state);
    result.regularizers_zeroed = schedule.regularizers_zeroed;
    result.final_weights = weights;
    return result;
  };

  if (energy <= config.energy_threshold) return finish(Termination::EnergyThreshold);

  for (int it = 1; it <= config.max_iterations; ++it) {
    const SparseMatrix jt = jac.transpose();
    const SparseMatrix jtj = jt * jac;
    const Eigen::VectorXd g = jt * r;

    bool stalled = false;
    if (g.lpNorm<Eigen::Infinity>() <= config.gradient_tolerance) {
      stalled = true;
    }

    Eigen::VectorXd h;
    TraceRow row;
    row.iteration = it;
    row.energy_before = energy;
    row.damping = mu;

    if (!stalled) {
      int attempts = 0;
      while (!system.solve(jtj, g, mu, h)) {
        mu *= 10.0;
        system.reset();
        if (++attempts > 20)
          throw Error(ErrorCode::LinearSolveFailure, "damped normal equations are singular");
      }
      const double xnorm = problem.gather(state).norm();
      if (h.norm() <= config.step_tolerance * (xnorm + config.step_tolerance)) stalled = true;
    }

    if (!stalled) {
      State trial = state;
      problem.apply_step(trial, h);
      Eigen::VectorXd r_new;
      problem.evaluate(trial, r_new, nullptr);
      const double e_new = all_finite(r_new) ? r_new.squaredNorm()
                                             : std::numeric_limits<double>::infinity();
      const double predicted = h.dot(mu * h - g);
      const double rho = predicted > 0.0 ? (energy - e_new) / predicted : -1.0;
      row.step_energy = e_new;
      if (rho > 0.0 && e_new < energy) {
        state = std::move(trial);
        problem.refresh(state, config.refresh_normals);
        problem.evaluate(state, r, &jac);
        if (!all_finite(r)) throw Error(ErrorCode::NonFiniteResidual, "residual became non-finite");
        energy = r.squaredNorm();
        mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
        nu = 2.0;
        rejections = 0;
        row.accepted = true;
        ++result.accepted;
        ++schedule.accepted_in_stage;
      } else {
        mu *= nu;
        nu *= 2.0;
        ++rejections;
      }
    }
    row.energy = energy;
    result.iterations = it;
    push_row(row);
    if (on_iteration && !on_iteration(state, result.trace.back()))
      return finish(Termination::Cancelled);

    if (energy <= config.energy_threshold) return finish(Termination::EnergyThreshold);

    if (rejections >= 12 || mu > 1e12) stalled = true;

    ScheduleAction action = schedule_weights(config, result.trace, schedule, weights);
    if (stalled && action == ScheduleAction::Continue) {
      // no progress possible at the current weights
      if (schedule.stage + 1 < static_cast<int>(config.stages.size())) {
        ++schedule.stage;
        schedule.accepted_in_stage = 0;
        weights = config.stages[schedule.stage].weights;
        action = ScheduleAction::AdvanceStage;
      } else if (config.zero_regularizers_on_stagnation && !schedule.regularizers_zeroed &&
                 weights.has_regularizers()) {
        weights.fair_v = weights.fair_n = weights.iso = 0.0;
        schedule.regularizers_zeroed = true;
        action = ScheduleAction::ZeroRegularizers;
      } else {
        action = ScheduleAction::Terminate;
      }
    }
    if (action == ScheduleAction::Terminate) {
      if (stalled && g.lpNorm<Eigen::Infinity>() <= config.gradient_tolerance)
        return finish(Termination::SmallGradient);
      return finish(stalled && rejections == 0 ? Termination::SmallStep : Termination::Stagnation);
    }
    if (action == ScheduleAction::AdvanceStage || action == ScheduleAction::ZeroRegularizers) {
      apply_weights(problem, weights);
      problem.evaluate(state, r, &jac);
      energy = r.squaredNorm();
      system.reset();
      mu = config.damping;
      nu = 2.0;
      rejections = 0;
      schedule.phase_start = static_cast<int>(result.trace.size());
      TraceRow ev;
      ev.iteration = it;
      ev.accepted = true;
      ev.damping = mu;
      ev.energy_before = ev.step_energy = ev.energy = energy;
      ev.event = action == ScheduleAction::AdvanceStage ? "stage" : "zero-regularizers";
      push_row(std::move(ev));
      if (energy <= config.energy_threshold) return finish(Termination::EnergyThreshold);
    }
  }
  return finish(Termination::MaxIterations);
}

void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& out) {
  out << "iteration,stage,event,accepted,damping,energy_before,step_energy,energy";
  for (int f = 0; f < kFamilyCount; ++f) out << ",E_" << family_name(static_cast<Family>(f));
  out << '\n';
  out.precision(10);
  for (const TraceRow& t : trace) {
    out << t.iteration << ',' << t.stage << ',' << t.event << ',' << (t.accepted ? 1 : 0) << ','
        << t.damping << ',' << t.energy_before << ',' << t.step_energy << ',' << t.energy;
    for (double e : t.raw) out << ',' << e;
    out << '\n';
  }
}

}  // namespace devquad
