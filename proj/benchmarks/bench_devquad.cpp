#include <cmath>
#include <numbers>
#include <random>

#include <benchmark/benchmark.h>

#include "devquad/loft.hpp"
#include "devquad/reference.hpp"
#include "devquad/report.hpp"
#include "devquad/workflow.hpp"

using namespace devquad;

namespace {

Polyline3 ellipse(int n, double a, double b, double z) {
  Polyline3 c;
  c.closed = true;
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * std::numbers::pi * k / n;
    c.points.emplace_back(a * std::cos(t), b * std::sin(t), z);
  }
  return c;
}

// 64 columns by 17 rows: 1024 faces.
QuadMesh loft_mesh() { return loft_init(ellipse(64, 1.3, 0.8, 0.0), ellipse(64, 1.0, 1.0, 1.5), {.rows = 17}); }

void BM_ResidualsAndJacobian(benchmark::State& st) {
  StandardProblem sp(loft_mesh(), default_loft_config());
  const State s = sp.initial_state();
  Eigen::VectorXd rows;
  SparseMatrix jac;
  for (auto _ : st) {
    sp.problem().evaluate(s, rows, &jac);
    benchmark::DoNotOptimize(rows.data());
  }
  st.counters["rows"] = static_cast<double>(rows.size());
}
BENCHMARK(BM_ResidualsAndJacobian)->Unit(benchmark::kMillisecond);

void BM_LmIteration(benchmark::State& st) {
  StandardProblem sp(loft_mesh(), default_loft_config());
  SolverConfig c = solver_config(default_loft_config());
  c.stages.clear();
  c.max_iterations = 1;
  const State s0 = sp.initial_state();
  for (auto _ : st) {
    const LmResult r = lm_minimize(sp.problem(), s0, c);
    benchmark::DoNotOptimize(r.state.x.data());
  }
}
BENCHMARK(BM_LmIteration)->Unit(benchmark::kMillisecond);

void BM_Validate(benchmark::State& st) {
  const QuadMesh m = loft_mesh();
  for (auto _ : st) benchmark::DoNotOptimize(validate(m).dev_total);
}
BENCHMARK(BM_Validate)->Unit(benchmark::kMicrosecond);

void BM_ClosestPoint(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const QuadMesh g = make_grid(n, n, false, [&](int i, int j) {
    const double phi = -1.2 + 2.4 * j / (n - 1), y = -1.5 + 3.0 * i / (n - 1);
    return Vec3(std::sin(phi), y, 1.0 - std::cos(phi));
  });
  const ReferenceSurface ref = ReferenceSurface::from_quads(g.vertices(), g.faces());
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::vector<Vec3> queries(1024);
  for (Vec3& q : queries) q = Vec3(u(rng), u(rng), u(rng));
  std::size_t k = 0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(ref.closest_point(queries[k++ % queries.size()]).distance);
  }
  st.counters["triangles"] = ref.primitive_count();
}
BENCHMARK(BM_ClosestPoint)->Arg(32)->Arg(128)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
