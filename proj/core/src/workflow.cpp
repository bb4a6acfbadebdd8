#include "devquad/workflow.hpp"

#include <chrono>
#include <future>
#include <istream>
#include <ostream>

#include "devquad/error.hpp"
#include "devquad/polylines.hpp"
#include "json.hpp"

namespace devquad {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void add_fairness(Problem& problem, const QuadMesh& mesh) {
  const PolylineSet lines = trace_polylines(mesh);
  std::vector<std::array<int, 3>> vt, ft;
  for (const auto& pl : lines.polylines)
    for (const auto& t : consecutive_triples(pl.vertices, pl.closed)) vt.push_back(t);
  for (const auto& st : lines.strips)
    for (const auto& t : consecutive_triples(st.faces, st.closed)) ft.push_back(t);
  problem.emplace<VertexFairnessBlock>(std::move(vt));
  problem.emplace<NormalFairnessBlock>(std::move(ft));
}

}  // namespace

void apply_fixed(QuadMesh& mesh, const JobConfig& config) {
  if (config.fix_boundary) mesh.fix_boundary();
  for (int v : config.fixed_vertices) {
    if (v < 0 || v >= mesh.vertex_count())
      throw Error(ErrorCode::UnknownVertex, "fixed vertex out of range", {v});
    mesh.set_fixed(v, true);
  }
}

StandardProblem::StandardProblem(QuadMesh mesh, const JobConfig& config, const ProblemInputs& inputs)
    : mesh_(std::make_unique<QuadMesh>(std::move(mesh))) {
  QuadMesh& m = *mesh_;
  apply_fixed(m, config);
  original_.assign(m.vertices().begin(), m.vertices().end());
  problem_ = std::make_unique<Problem>(m);
  Problem& p = *problem_;
  p.emplace<NormalBlock>(m);
  p.emplace<RulingBlock>(m);
  p.emplace<DevBlock>(m, config.dev_form);
  add_fairness(p, m);
  const std::span<const Vec3> iso_ref =
      inputs.iso_reference.empty() ? std::span<const Vec3>(original_) : inputs.iso_reference;
  iso_ = configure_material(p, config.material, iso_ref, config.weights.iso);
  if (!config.handles.empty()) {
    std::vector<std::pair<int, Vec3>> targets;
    for (const auto& h : config.handles) targets.emplace_back(h.vertex, h.target);
    handles_ = std::make_shared<HandleBlock>(m, std::move(targets));
    p.add(handles_);
  }
  if (config.gliding) {
    const double radius =
        config.gliding->radius > 0 ? config.gliding->radius : 2.0 * m.mean_edge_length();
    glide_ = std::make_shared<GlideBlock>(m, inputs.glide_cloud, radius);
    p.add(glide_);
  }
  if (inputs.reference) p.emplace<ProxBlock>(m, inputs.reference);
  const SolverConfig sc = solver_config(config);
  apply_weights(p, sc.stages.front().weights);
}

State StandardProblem::initial_state() const { return problem_->initial_state(); }

SolverConfig solver_config(const JobConfig& config) {
  SolverConfig sc = config.solver;
  if (sc.stages.empty()) sc.stages.push_back({config.weights, 0});
  return sc;
}

std::string status_for(const ValidationReport& report, double tolerance) {
  return report.dev_per_face <= tolerance ? "converged" : "unreachable";
}

OptimizeOutcome optimize(QuadMesh mesh, const JobConfig& config, const ProblemInputs& inputs,
                         const IterationCallback& on_iteration) {
  const auto t0 = std::chrono::steady_clock::now();
  StandardProblem sp(std::move(mesh), config, inputs);
  LmResult lm = lm_minimize(sp.problem(), sp.initial_state(), solver_config(config), on_iteration);
  OptimizeOutcome out{sp.mesh(), std::move(lm), {}};
  out.mesh.set_vertices(out.lm.state.positions());
  out.report = validate(sp.mesh(), out.lm.state, &sp.problem(), sp.original());
  out.report.iterations = out.lm.iterations;
  out.report.seconds = seconds_since(t0);
  out.report.status = status_for(out.report, config.tolerance);
  return out;
}

OptimizeOutcome loft(const Polyline3& a, const Polyline3& b, const JobConfig& config) {
  return optimize(loft_init(a, b, config.loft), config);
}

JobConfig default_approximate_config() {
  JobConfig c;
  c.weights.fair_v = 0.01;
  c.weights.fair_n = 0.01;
  c.weights.pos = 1.0;
  return c;
}

namespace {

struct StripJob {
  std::vector<Vec3> positions;
  StripOutcome outcome;
};

StripJob run_strip(const SubMesh& sub, const std::shared_ptr<const ReferenceSurface>& reference,
                   const JobConfig& config) {
  const QuadMesh& m = sub.mesh;
  auto layout = std::make_shared<const VariableLayout>(m);
  Problem soft(m, layout);
  add_fairness(soft, m);
  soft.emplace<ProxBlock>(m, reference);
  Problem hard(m, layout);
  hard.emplace<NormalBlock>(m);
  hard.emplace<RulingBlock>(m);
  hard.emplace<DevBlock>(m, config.dev_form);
  apply_weights(soft, config.weights);
  apply_weights(hard, config.weights);

  ProjectionResult res = constrained_minimize(soft, hard, initial_state(m, layout), config.projection);
  StripJob job;
  job.positions = res.state.positions();
  job.outcome.outer = std::move(res.outer);
  job.outcome.status = res.status;
  job.outcome.max_constraint = max_abs_row(hard, res.state);
  return job;
}

}  // namespace

ApproximationOutcome approximate(QuadMesh mesh, std::shared_ptr<const ReferenceSurface> reference,
                                 const JobConfig& config) {
  if (!reference || reference->empty())
    throw Error(ErrorCode::EmptyReference, "approximation needs a reference surface");
  const auto t0 = std::chrono::steady_clock::now();
  apply_fixed(mesh, config);
  const std::vector<Vec3> original(mesh.vertices().begin(), mesh.vertices().end());

  ApproximationOutcome out;
  if (config.strip_polylines.empty()) {
    Strip all;
    for (int f = 0; f < mesh.face_count(); ++f) all.faces.push_back(f);
    all.fixed_vertices = mesh.fixed_vertices();
    out.strips.strips.push_back(std::move(all));
  } else {
    out.strips = decompose_strips(mesh, trace_polylines(mesh), config.strip_polylines);
  }

  std::vector<SubMesh> subs;
  for (const Strip& s : out.strips.strips) subs.push_back(extract_strip(mesh, s));
  std::vector<std::future<StripJob>> jobs;
  for (const SubMesh& sub : subs)
    jobs.push_back(std::async(std::launch::async, run_strip, std::cref(sub), std::cref(reference),
                              std::cref(config)));

  std::vector<Vec3> positions = original;
  for (std::size_t s = 0; s < jobs.size(); ++s) {
    StripJob job = jobs[s].get();
    const SubMesh& sub = subs[s];
    for (std::size_t k = 0; k < sub.parent_vertex.size(); ++k)
      if (!sub.mesh.is_fixed(static_cast<int>(k))) positions[sub.parent_vertex[k]] = job.positions[k];
    out.per_strip.push_back(std::move(job.outcome));
  }

  mesh.set_vertices(positions);
  out.mesh = mesh;
  State state = initial_state(out.mesh);
  out.report = validate(out.mesh, state, nullptr, original);
  int iterations = 0;
  for (const auto& s : out.per_strip) iterations += static_cast<int>(s.outer.size()) - 1;
  out.report.iterations = iterations;
  out.report.seconds = seconds_since(t0);
  out.report.status = status_for(out.report, config.tolerance);
  return out;
}

void write_strips_json(const StripDecomposition& strips, std::ostream& out) {
  nlohmann::json j;
  j["cut_polylines"] = strips.cut_polylines;
  nlohmann::json list = nlohmann::json::array();
  for (const Strip& s : strips.strips) list.push_back({{"faces", s.faces}, {"fixed", s.fixed_vertices}});
  j["strips"] = list;
  out << j.dump(2) << '\n';
}

StripDecomposition read_strips_json(std::istream& in) {
  StripDecomposition d;
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    if (j.contains("cut_polylines")) d.cut_polylines = j["cut_polylines"].get<std::vector<int>>();
    for (const auto& s : j.at("strips"))
      d.strips.push_back({s.at("faces").get<std::vector<int>>(), s.at("fixed").get<std::vector<int>>()});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("strip file: ") + e.what());
  }
  return d;
}

}  // namespace devquad
