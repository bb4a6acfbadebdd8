#pragma once

#include <functional>
#include <string>
#include <vector>

#include "devquad/problem.hpp"

namespace devquad {

// Per-family weights. `pos` applies to handle, gliding and proximity terms.
struct Weights {
  double norm = 1.0;
  double rul = 1.0;
  double dev = 1.0;
  double fair_v = 0.0;
  double fair_n = 0.0;
  double iso = 0.0;
  double pos = 0.0;

  bool has_regularizers() const { return fair_v > 0 || fair_n > 0 || iso > 0; }
  bool operator==(const Weights&) const = default;
};

double weight_for(const Weights& w, Family family);
void apply_weights(Problem& problem, const Weights& weights);

// Weights held for a number of accepted iterations. A stage with
// iterations <= 0 runs until stagnation. Once the last stage has spent a
// positive budget, the regularizer weights are set to zero.
struct ScheduleStage {
  Weights weights;
  int iterations = 0;
};

struct SolverConfig {
  std::vector<ScheduleStage> stages;  // empty: keep the problem's weights
  double damping = 1e-6;
  int max_iterations = 200;
  double energy_threshold = 1e-24;
  // Stagnation: relative decrease below `stagnation_tolerance` over
  // `stagnation_window` consecutive accepted iterations.
  double stagnation_tolerance = 1e-6;
  int stagnation_window = 5;
  bool zero_regularizers_on_stagnation = true;
  // After each accepted iteration, flip normals that disagree with their
  // frame normal (see align_normal_orientation).
  bool refresh_normals = true;
  double gradient_tolerance = 1e-20;
  double step_tolerance = 1e-16;
};

struct TraceRow {
  int iteration = 0;
  bool accepted = false;
  double damping = 0.0;
  double energy_before = 0.0;  // total at the start of the iteration
  double step_energy = 0.0;    // total at the trial point
  double energy = 0.0;         // total after the iteration (post refresh)
  FamilyEnergies raw{};        // unweighted family energies after the iteration
  int stage = 0;
  std::string event;           // "", "start", "stage", "zero-regularizers"
};

enum class Termination {
  EnergyThreshold,
  Stagnation,
  MaxIterations,
  SmallGradient,
  SmallStep,
  Cancelled,
};
std::string_view to_string(Termination t);

struct LmResult {
  State state;
  std::vector<TraceRow> trace;
  Termination reason = Termination::MaxIterations;
  int iterations = 0;
  int accepted = 0;
  bool regularizers_zeroed = false;
  Weights final_weights;
};

// Called after every iteration; returning false cancels the run.
using IterationCallback = std::function<bool(const State&, const TraceRow&)>;

// Throws Error{NonFiniteResidual} if the starting residual is not finite and
// Error{LinearSolveFailure} if the damped normal equations cannot be solved.
LmResult lm_minimize(Problem& problem, State state, const SolverConfig& config,
                     const IterationCallback& on_iteration = {});

// Stage bookkeeping shared between lm_minimize and callers that drive the
// schedule themselves.
struct ScheduleState {
  int stage = 0;
  int accepted_in_stage = 0;
  bool regularizers_zeroed = false;
  int phase_start = 0;  // first trace row of the current weight phase
};

enum class ScheduleAction { Continue, AdvanceStage, ZeroRegularizers, Terminate };

// True when the accepted rows of the current phase have stopped improving.
bool is_stagnating(const std::vector<TraceRow>& trace, int phase_start, int window, double tolerance);

// Decides the next schedule move and updates `weights` and `schedule`.
ScheduleAction schedule_weights(const SolverConfig& config, const std::vector<TraceRow>& trace,
                                ScheduleState& schedule, Weights& weights);

// Writes the trace as CSV: iteration, family energies, total, damping, ...
void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& out);

}  // namespace devquad
