#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "doctest.h"

#include "devquad/config.hpp"
#include "devquad/error.hpp"
#include "devquad/obj_io.hpp"
#include "devquad/report.hpp"
#include "devquad/workflow.hpp"
#include "fixtures.hpp"

#ifdef DEVQUAD_HAVE_CLI
#include "cli.hpp"
#endif

using namespace devquad;
namespace fx = devquad::fixtures;
using nlohmann::json;

namespace {

ErrorCode config_error(const json& j) {
  try {
    config_from_json(j);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("devquad_unit_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_curve(const std::string& path, const Polyline3& c) {
  std::ofstream o(path);
  o.precision(17);
  for (const Vec3& p : c.points) o << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  o << 'l';
  for (std::size_t i = 0; i < c.points.size(); ++i) o << ' ' << i + 1;
  o << '\n';
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(config_from_json(json{{"version", 1}}));
  CHECK(config_error(json::object()) == ErrorCode::InvalidConfig);
  CHECK(config_error(json{{"version", 2}}) == ErrorCode::InvalidConfig);
  CHECK(config_error(json{{"version", 1}, {"wieghts", json::object()}}) == ErrorCode::InvalidConfig);
  CHECK(config_error(json{{"version", 1}, {"weights", {{"dev", -1.0}}}}) == ErrorCode::InvalidConfig);
  CHECK(config_error(json{{"version", 1}, {"weights", {{"dev", "ten"}}}}) == ErrorCode::InvalidConfig);
  CHECK(config_error(json{{"version", 1}, {"solver", {{"damping", 0.0}}}}) == ErrorCode::InvalidConfig);
  CHECK(config_error(json{{"version", 1}, {"dev_form", "cross"}}) == ErrorCode::InvalidConfig);
  CHECK(config_error(json{{"version", 1}, {"material", "rubber"}}) == ErrorCode::InvalidConfig);
  CHECK(config_error(json{{"version", 1}, {"schedule", {{{"iterations", 3}, {"steps", 1}}}}}) ==
        ErrorCode::InvalidConfig);
  CHECK(config_error(json{{"version", 1}, {"handles", {{{"vertex", 0}}}}}) == ErrorCode::InvalidConfig);
}

TEST_CASE("config weights and schedule") {
  SUBCASE("weights without schedule replace the base schedule") {
    const JobConfig c = config_from_json(json{{"version", 1}, {"weights", {{"dev", 5.0}}}}, default_loft_config());
    CHECK(c.solver.stages.empty());
    CHECK(c.weights.dev == 5.0);
    CHECK(c.weights.rul == default_loft_config().weights.rul);
  }
  SUBCASE("schedule stages inherit the weights") {
    const JobConfig c = config_from_json(json{{"version", 1},
                                              {"weights", {{"fair_v", 0.5}}},
                                              {"schedule", {{{"iterations", 2}},
                                                            {{"weights", {{"fair_v", 0.0}}}, {"iterations", 1}}}}});
    REQUIRE(c.solver.stages.size() == 2);
    CHECK(c.solver.stages[0].weights.fair_v == 0.5);
    CHECK(c.solver.stages[1].weights.fair_v == 0.0);
    CHECK(c.solver.stages[1].weights.dev == c.weights.dev);
    CHECK(c.solver.stages[0].iterations == 2);
  }
  SUBCASE("round trip") {
    JobConfig a = default_loft_config();
    a.handles.push_back({3, Vec3(1, 2, 3)});
    a.gliding = GlidingSpec{"curves.obj", 0.25};
    a.strip_polylines = {4, 7};
    a.dev_form = DevForm::Determinant;
    const JobConfig b = config_from_json(config_to_json(a));
    CHECK(config_to_json(b) == config_to_json(a));
    CHECK(b.solver.stages.size() == 2);
    CHECK(b.solver.stages[1].weights == a.solver.stages[1].weights);
    CHECK(b.handles[0].target == Vec3(1, 2, 3));
  }
}

TEST_CASE("config overrides") {
  json j{{"version", 1}};
  apply_override(j, "weights.dev=10");
  apply_override(j, "solver.max_iterations=7");
  apply_override(j, "output=out.obj");
  apply_override(j, "fix_boundary=true");
  const JobConfig c = config_from_json(j);
  CHECK(c.weights.dev == 10.0);
  CHECK(c.solver.max_iterations == 7);
  CHECK(c.output == "out.obj");
  CHECK(c.fix_boundary);
  CHECK_THROWS_AS(apply_override(j, "no equals sign"), Error);
}

TEST_CASE("report totals are sums of the per-face values") {
  const QuadMesh m = fx::sampled_grid(9, 9, [](double u, double v) {
    return Vec3(u, v, 0.3 * u * u + 0.2 * std::sin(3 * v));
  });
  const ValidationReport r = validate(m);
  double total = 0.0, total_det = 0.0;
  int counted = 0;
  for (int f = 0; f < r.faces; ++f) {
    CHECK(std::isnan(r.dev_vector[f]) == !m.is_interior_face(f));
    if (std::isnan(r.dev_vector[f])) continue;
    total += r.dev_vector[f];
    total_det += r.dev_det[f];
    ++counted;
  }
  CHECK(counted == r.interior_faces);
  CHECK(std::abs(total - r.dev_total) <= 1e-12 * std::max(1.0, total));
  CHECK(std::abs(total_det - r.dev_total_det) <= 1e-12 * std::max(1.0, total_det));
  CHECK(r.dev_per_face == doctest::Approx(total / counted).epsilon(1e-12));

  std::ostringstream csv;
  write_report_csv(r, csv);
  CHECK(csv.str().rfind("metric,value\n", 0) == 0);
  CHECK(csv.str().find("\nface,dev_vector,dev_det\n") != std::string::npos);
}

TEST_CASE("a plane validates to zero") {
  const ValidationReport r = validate(fx::plane_grid(6, 7));
  CHECK(r.dev_total == 0.0);
  CHECK(r.dev_total_det == 0.0);
  CHECK(r.dev_max == 0.0);
  CHECK(r.interior_faces == 3 * 4);
}

TEST_CASE("optimization is deterministic") {
  JobConfig c = default_loft_config();
  c.loft.rows = 6;
  const Polyline3 a = fx::ellipse(12, 1.3, 0.8, 0), b = fx::ellipse(12, 1, 1, 1);
  const OptimizeOutcome x = loft(a, b, c), y = loft(a, b, c);
  REQUIRE(x.mesh.vertex_count() == y.mesh.vertex_count());
  for (int v = 0; v < x.mesh.vertex_count(); ++v) CHECK(x.mesh.vertex(v) == y.mesh.vertex(v));
  REQUIRE(x.lm.trace.size() == y.lm.trace.size());
  for (std::size_t k = 0; k < x.lm.trace.size(); ++k) CHECK(x.lm.trace[k].energy == y.lm.trace[k].energy);
}

#ifdef DEVQUAD_HAVE_CLI
namespace {

int run(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "devquad");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

}  // namespace

TEST_CASE("command line exit codes") {
  TempDir dir;
  const std::string plane = dir.file("plane.obj");
  save_mesh(fx::plane_grid(4, 4), plane);

  SUBCASE("validate a plane") {
    const std::string report = dir.file("plane.csv");
    CHECK(run({"validate", plane, "--report", report}) == 0);
    std::ifstream in(report);
    std::string first, second;
    std::getline(in, first);
    std::getline(in, second);
    CHECK(first == "metric,value");
    CHECK(second == "status,developable");
  }
  SUBCASE("unreachable loft still writes its outputs") {
    const std::string a = dir.file("a.obj"), b = dir.file("b.obj");
    write_curve(a, fx::segment(Vec3(-1, 0, 0), Vec3(1, 0, 0), 12));
    write_curve(b, fx::segment(Vec3(0, -1, 1), Vec3(0, 1, 1), 12));
    const std::string mesh = dir.file("skew.obj"), report = dir.file("skew.csv");
    CHECK(run({"loft", a, b, "--rows", "12", "--tolerance", "1e-12", "-o", mesh, "--report", report}) == 2);
    CHECK(std::filesystem::exists(mesh));
    CHECK(std::filesystem::exists(report));
    CHECK(load_mesh(mesh).face_count() == 11 * 11);
  }
  SUBCASE("converging loft with a trace") {
    const std::string a = dir.file("a.obj"), b = dir.file("b.obj"), trace = dir.file("t.csv");
    write_curve(a, fx::segment(Vec3(0, 0, 0), Vec3(2, 0, 0), 6));
    write_curve(b, fx::segment(Vec3(0, 1, 0.5), Vec3(2, 1, 0.5), 6));
    CHECK(run({"loft", a, b, "--rows", "5", "--trace", trace}) == 0);
    std::ifstream in(trace);
    std::string header;
    std::getline(in, header);
    CHECK(header.find("energy") != std::string::npos);
  }
  SUBCASE("usage and input errors") {
    std::string text;
    CHECK(run({"frobnicate"}, &text) == 1);
    CHECK(run({}, &text) == 1);
    CHECK(run({"validate", dir.file("missing.obj")}, &text) == 1);
    CHECK(text.find("error") != std::string::npos);
    CHECK(run({"optimize", plane, "--set", "weights.dev=-1"}, &text) == 1);
    CHECK(run({"--help"}, &text) == 0);
    CHECK(text.find("loft") != std::string::npos);
  }
  SUBCASE("rulings and Gauss image") {
    std::string text;
    CHECK(run({"rulings", plane, "-o", dir.file("r.obj")}, &text) == 0);
    CHECK(text.find("rulings 12 zero 12") != std::string::npos);
    CHECK(run({"gauss", plane, "-o", dir.file("g.obj")}, &text) == 0);
    CHECK(text.find("points 9") != std::string::npos);
  }
}
#endif
