#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"

#include "devquad/error.hpp"
#include "devquad/projection.hpp"
#include "devquad/solver.hpp"
#include "fixtures.hpp"

using namespace devquad;
namespace fx = devquad::fixtures;

namespace {

// r(x) = x^2 - 4 on the first coordinate of vertex 0.
class RootBlock final : public ResidualBlock {
 public:
  Family family() const override { return Family::Handle; }
  int row_count() const override { return 1; }
  void evaluate(const State& s, std::span<double> rows, Triplets* jac) const override {
    const double x = s.x[0];
    rows[0] = x * x - 4.0;
    if (jac) jac->emplace_back(0, 0, 2.0 * x);
  }
};

struct RootProblem {
  QuadMesh mesh;
  std::unique_ptr<Problem> problem;

  RootProblem() : mesh(fx::plane_grid(2, 2)) {
    for (int v = 1; v < 4; ++v) mesh.set_fixed(v, true);
    problem = std::make_unique<Problem>(mesh);
    problem->emplace<RootBlock>();
  }
};

SolverConfig plain() {
  SolverConfig c;
  c.refresh_normals = false;
  return c;
}

TraceRow accepted_row(double energy) {
  TraceRow r;
  r.accepted = true;
  r.energy = r.step_energy = energy;
  return r;
}

}  // namespace

TEST_CASE("LM finds the root of x^2 - 4 from 3") {
  RootProblem rp;
  State s = rp.problem->initial_state();
  s.x[0] = 3.0;
  const LmResult r = lm_minimize(*rp.problem, s, plain());
  CHECK(std::abs(r.state.x[0] - 2.0) < 1e-10);
  CHECK(r.iterations < 20);
}

TEST_CASE("LM at a zero-residual start returns at once") {
  RootProblem rp;
  State s = rp.problem->initial_state();
  s.x[0] = 2.0;
  const LmResult r = lm_minimize(*rp.problem, s, plain());
  CHECK(r.trace.size() == 1);
  CHECK(r.reason == Termination::EnergyThreshold);
  CHECK(r.state.x == s.x);
}

TEST_CASE("LM rejects nonpositive damping and non-finite starts") {
  RootProblem rp;
  State s = rp.problem->initial_state();
  SolverConfig c = plain();
  c.damping = 0.0;
  CHECK_THROWS_AS(lm_minimize(*rp.problem, s, c), Error);
  s.x[0] = std::nan("");
  try {
    lm_minimize(*rp.problem, s, plain());
    FAIL("accepted NaN");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteResidual);
  }
}

TEST_CASE("accepted LM steps never increase the energy and runs are deterministic") {
  const QuadMesh m = loft_init(fx::ellipse(12, 1.2, 0.8, 0), fx::ellipse(12, 1, 1, 1), {.rows = 6});
  auto run = [&] {
    Problem p(m);
    p.emplace<NormalBlock>(m);
    p.emplace<RulingBlock>(m);
    p.emplace<DevBlock>(m, DevForm::Vector);
    p.emplace<VertexFairnessBlock>(fx::vertex_triples(m), 0.1);
    SolverConfig c;
    c.max_iterations = 30;
    return lm_minimize(p, p.initial_state(), c);
  };
  const LmResult a = run(), b = run();
  for (const TraceRow& row : a.trace)
    if (row.accepted && row.event.empty()) CHECK(row.step_energy <= row.energy_before);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i].energy == b.trace[i].energy);
  CHECK(a.state.x == b.state.x);
}

TEST_CASE("schedule rules") {
  SolverConfig c;
  Weights w;
  w.fair_v = 0.1;
  w.fair_n = 1.0;
  w.iso = 0.1;

  SUBCASE("improving trace keeps the weights") {
    std::vector<TraceRow> trace;
    for (int i = 0; i < 8; ++i) trace.push_back(accepted_row(std::pow(0.5, i)));
    ScheduleState st;
    Weights cur = w;
    CHECK(schedule_weights(c, trace, st, cur) == ScheduleAction::Continue);
    CHECK(cur == w);
  }
  SUBCASE("stagnation zeroes the regularizers once, then terminates") {
    std::vector<TraceRow> trace(8, accepted_row(1.0));
    ScheduleState st;
    Weights cur = w;
    CHECK(schedule_weights(c, trace, st, cur) == ScheduleAction::ZeroRegularizers);
    CHECK(st.regularizers_zeroed);
    CHECK(cur.fair_v == 0.0);
    CHECK(cur.fair_n == 0.0);
    CHECK(cur.iso == 0.0);
    CHECK(cur.dev == w.dev);
    CHECK(schedule_weights(c, trace, st, cur) == ScheduleAction::Terminate);
  }
  SUBCASE("stagnation without regularizers terminates") {
    std::vector<TraceRow> trace(8, accepted_row(1.0));
    ScheduleState st;
    Weights cur;
    CHECK(schedule_weights(c, trace, st, cur) == ScheduleAction::Terminate);
  }
  SUBCASE("stage budgets advance, and the last budget zeroes the regularizers") {
    Weights second = w;
    second.fair_v = 0.01;
    c.stages = {{w, 2}, {second, 1}};
    std::vector<TraceRow> trace = {accepted_row(4.0), accepted_row(2.0)};
    ScheduleState st;
    st.accepted_in_stage = 2;
    Weights cur = w;
    CHECK(schedule_weights(c, trace, st, cur) == ScheduleAction::AdvanceStage);
    CHECK(cur == second);
    st.accepted_in_stage = 1;
    CHECK(schedule_weights(c, trace, st, cur) == ScheduleAction::ZeroRegularizers);
    CHECK_FALSE(cur.has_regularizers());
  }
}

TEST_CASE("trace CSV has one line per row") {
  RootProblem rp;
  State s = rp.problem->initial_state();
  s.x[0] = 3.0;
  const LmResult r = lm_minimize(*rp.problem, s, plain());
  std::ostringstream out;
  write_trace_csv(r.trace, out);
  const std::string text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(r.trace.size() + 1));
  CHECK(text.rfind("iteration", 0) == 0);
}

TEST_CASE("project_tangent") {
  auto grads = [](std::vector<Eigen::Vector3d> rows) {
    SparseMatrix g(static_cast<int>(rows.size()), 3);
    Triplets t;
    for (int i = 0; i < static_cast<int>(rows.size()); ++i)
      for (int c = 0; c < 3; ++c)
        if (rows[i][c] != 0.0) t.emplace_back(i, c, rows[i][c]);
    g.setFromTriplets(t.begin(), t.end());
    return g;
  };
  SUBCASE("already orthogonal") {
    const Eigen::VectorXd h = Vec3(0, 2, 3);
    CHECK((project_tangent(h, grads({Vec3(1, 0, 0)})) - h).norm() < 1e-15);
  }
  SUBCASE("single gradient") {
    const Eigen::VectorXd h = Vec3(1, 1, 0);
    CHECK((project_tangent(h, grads({Vec3(1, 0, 0)})) - Eigen::VectorXd(Vec3(0, 1, 0))).norm() < 1e-12);
  }
  SUBCASE("two gradients") {
    const Eigen::VectorXd h = Vec3(1, 2, 3);
    CHECK((project_tangent(h, grads({Vec3(1, 0, 0), Vec3(0, 1, 0)})) - Eigen::VectorXd(Vec3(0, 0, 3))).norm() <
          1e-12);
  }
  SUBCASE("random sparse gradients, dense and sparse Gram paths") {
    std::mt19937 rng(1);
    std::normal_distribution<double> n01;
    std::uniform_int_distribution<int> col(0, 99);
    Triplets t;
    for (int r = 0; r < 30; ++r)
      for (int k = 0; k < 5; ++k) t.emplace_back(r, col(rng), n01(rng));
    SparseMatrix g(30, 100);
    g.setFromTriplets(t.begin(), t.end());
    Eigen::VectorXd h(100);
    for (auto& x : h) x = n01(rng);
    for (int limit : {2000, 0}) {
      ProjectionConfig pc;
      pc.dense_gram_limit = limit;
      TangentReport rep;
      const Eigen::VectorXd hp = project_tangent(h, g, pc, &rep);
      CHECK(rep.dense == (limit > 0));
      CHECK(rep.max_violation <= 1e-10);
      for (int r = 0; r < 30; ++r) {
        const Eigen::VectorXd gi = g.row(r).transpose();
        CHECK(std::abs(hp.dot(gi)) <= 1e-10 * hp.norm() * gi.norm());
      }
    }
  }
}

TEST_CASE("constrained_minimize") {
  const QuadMesh mesh = make_grid(7, 7, false, [](int i, int j) {
    return Vec3(-0.6 + 0.2 * j, -0.6 + 0.2 * i, 0.0);
  });
  auto layout = std::make_shared<const VariableLayout>(mesh);
  auto build = [&](std::shared_ptr<const ReferenceSurface> ref, Problem& soft, Problem& hard) {
    soft.emplace<VertexFairnessBlock>(fx::vertex_triples(mesh), 0.01);
    soft.emplace<ProxBlock>(mesh, ref);
    hard.emplace<NormalBlock>(mesh);
    hard.emplace<RulingBlock>(mesh);
    hard.emplace<DevBlock>(mesh, DevForm::Vector);
  };

  SUBCASE("planar patch is pulled onto a cylinder") {
    auto ref = std::make_shared<const ReferenceSurface>(fx::cylinder_reference(2.0, 0.9, 1.5, 50));
    Problem soft(mesh, layout), hard(mesh, layout);
    build(ref, soft, hard);
    ProjectionConfig pc;
    const ProjectionResult res = constrained_minimize(soft, hard, initial_state(mesh, layout), pc);
    REQUIRE(res.outer.size() >= 2);
    for (std::size_t i = 1; i < res.outer.size(); ++i) CHECK(res.outer[i].soft_energy < res.outer[i - 1].soft_energy);
    for (const OuterStep& o : res.outer) CHECK(o.max_constraint_row <= 10.0 * pc.constraint_tolerance);
    double far = 0.0;
    for (const Vec3& p : res.state.positions()) far = std::max(far, fx::cylinder_distance(p, 2.0));
    CHECK(far < 5e-3);
  }
  SUBCASE("a state already minimal stays put") {
    auto ref = std::make_shared<const ReferenceSurface>(
        ReferenceSurface::from_quads(mesh.vertices(), mesh.faces()));
    Problem soft(mesh, layout), hard(mesh, layout);
    build(ref, soft, hard);
    const State start = initial_state(mesh, layout);
    const ProjectionResult res = constrained_minimize(soft, hard, start, {});
    CHECK(res.outer.size() == 1);
    CHECK((res.state.x - start.x).norm() < 1e-12);
  }
  SUBCASE("tiny mu leaves the state where it is") {
    auto ref = std::make_shared<const ReferenceSurface>(fx::cylinder_reference(2.0, 0.9, 1.5, 30));
    Problem soft(mesh, layout), hard(mesh, layout);
    build(ref, soft, hard);
    ProjectionConfig pc;
    pc.max_outer_iterations = 1;
    const State start = initial_state(mesh, layout);
    const double unit_move = (constrained_minimize(soft, hard, start, pc).state.x - start.x).norm();
    pc.mu = 1e-14;
    const double tiny_move = (constrained_minimize(soft, hard, start, pc).state.x - start.x).norm();
    CHECK(unit_move > 1e-3);
    CHECK(tiny_move < 1e-6 * unit_move);
  }
  SUBCASE("mu must be positive") {
    auto ref = std::make_shared<const ReferenceSurface>(fx::cylinder_reference(2.0, 0.9, 1.5, 10));
    Problem soft(mesh, layout), hard(mesh, layout);
    build(ref, soft, hard);
    ProjectionConfig pc;
    pc.mu = 0.0;
    CHECK_THROWS_AS(constrained_minimize(soft, hard, initial_state(mesh, layout), pc), Error);
  }
}

TEST_CASE("fixed vertices do not move") {
  QuadMesh m = loft_init(fx::ellipse(10, 1.2, 0.7, 0), fx::ellipse(10, 1, 1, 1), {.rows = 5});
  Problem p(m);
  p.emplace<NormalBlock>(m);
  p.emplace<RulingBlock>(m);
  p.emplace<DevBlock>(m, DevForm::Vector);
  p.emplace<VertexFairnessBlock>(fx::vertex_triples(m), 0.1);
  const State start = p.initial_state();
  SolverConfig c;
  c.max_iterations = 10;
  const LmResult r = lm_minimize(p, start, c);
  for (int v = 0; v < m.vertex_count(); ++v)
    if (m.is_fixed(v)) CHECK(r.state.position(v) == start.position(v));
}
