#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"

#include "devquad/error.hpp"
#include "devquad/frame.hpp"
#include "devquad/mesh.hpp"
#include "devquad/obj_io.hpp"
#include "devquad/polylines.hpp"
#include "devquad/residuals.hpp"
#include "devquad/state.hpp"
#include "fixtures.hpp"

using namespace devquad;
namespace fx = devquad::fixtures;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::Io;
}

QuadMesh single_quad(std::array<Vec3, 4> v) {
  return QuadMesh({v[0], v[1], v[2], v[3]}, {Face{0, 1, 2, 3}});
}

}  // namespace

TEST_CASE("frame of the unit square") {
  const QuadMesh m = single_quad({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)});
  const CheckerboardFrame f = build_frame(m, 0);
  CHECK((f.normal - Vec3(0, 0, 1)).norm() < 1e-15);
  CHECK((f.barycenter - Vec3(0.5, 0.5, 0)).norm() < 1e-15);
}

TEST_CASE("frame of a skew quad") {
  const QuadMesh m = single_quad({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 1), Vec3(0, 1, 0)});
  const CheckerboardFrame f = build_frame(m, 0);
  CHECK((f.normal - Vec3(-1, -1, 2) / std::sqrt(6.0)).norm() < 1e-15);
}

TEST_CASE("frame barycenter is the mean of the midpoints and the midpoints form a parallelogram") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 200; ++k) {
    std::array<Vec3, 4> v;
    for (Vec3& p : v) p = Vec3(u(rng), u(rng), u(rng));
    const QuadMesh m = single_quad(v);
    CheckerboardFrame f;
    try {
      f = build_frame(m, 0);
    } catch (const Error&) {
      continue;
    }
    const Vec3 mid = 0.25 * (f.midpoints[0] + f.midpoints[1] + f.midpoints[2] + f.midpoints[3]);
    const Vec3 centroid = 0.25 * (v[0] + v[1] + v[2] + v[3]);
    CHECK((f.barycenter - centroid).norm() <= 1e-14 * std::max(1.0, centroid.norm()));
    CHECK((mid - centroid).norm() <= 1e-14 * std::max(1.0, centroid.norm()));
    const Vec3 a = f.midpoints[1] - f.midpoints[0], b = f.midpoints[2] - f.midpoints[3];
    CHECK((a - b).norm() <= 1e-15 * std::max(1.0, a.norm()) * 4);
    CHECK(std::abs(f.normal.norm() - 1.0) < 1e-15);
  }
}

TEST_CASE("degenerate face is rejected") {
  const QuadMesh m = single_quad({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(3, 0, 0)});
  CHECK(code_of([&] { build_frame(m, 0); }) == ErrorCode::DegenerateFace);
}

TEST_CASE("connectivity of a grid") {
  const QuadMesh m = fx::plane_grid(4, 5);
  CHECK(m.vertex_count() == 20);
  CHECK(m.face_count() == 12);
  int paired = 0;
  for (int h = 0; h < m.halfedge_count(); ++h) {
    const int o = m.opposite(h);
    if (o < 0) continue;
    ++paired;
    CHECK(m.opposite(o) == h);
    CHECK(m.from(h) == m.to(o));
    CHECK(m.to(h) == m.from(o));
  }
  CHECK(paired == m.interior_halfedge_count());
  CHECK(m.singular_vertices().empty());
  CHECK(m.is_interior_face(5));
  CHECK_FALSE(m.is_interior_face(0));
}

TEST_CASE("invalid meshes") {
  SUBCASE("repeated vertex") {
    CHECK(code_of([] { QuadMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0)}, {Face{0, 1, 2, 2}}); }) ==
          ErrorCode::NonQuadFace);
  }
  SUBCASE("index out of range") {
    CHECK(code_of([] { QuadMesh({Vec3(0, 0, 0)}, {Face{0, 1, 2, 3}}); }) == ErrorCode::InvalidIndex);
  }
  SUBCASE("inconsistent orientation") {
    std::vector<Vec3> v(6, Vec3::Zero());
    for (int i = 0; i < 6; ++i) v[i] = Vec3(i % 3, i / 3, 0);
    CHECK(code_of([&] { QuadMesh(v, {Face{0, 1, 4, 3}, Face{1, 4, 5, 2}}); }) ==
          ErrorCode::InconsistentOrientation);
  }
  SUBCASE("edge shared by three faces") {
    std::vector<Vec3> v(8, Vec3::Zero());
    CHECK(code_of([&] {
            QuadMesh(v, {Face{0, 1, 2, 3}, Face{1, 0, 4, 5}, Face{1, 0, 6, 7}});
          }) == ErrorCode::NonManifoldEdge);
  }
}

TEST_CASE("polylines of a regular grid") {
  const int n = 5, m = 7;
  const PolylineSet p = trace_polylines(fx::plane_grid(n, m));
  CHECK(p.polylines.size() == static_cast<std::size_t>(n + m));
  CHECK(p.strips.size() == static_cast<std::size_t>((n - 1) + (m - 1)));
  for (const auto& pl : p.polylines) {
    CHECK_FALSE(pl.closed);
    CHECK((pl.vertices.size() == n || pl.vertices.size() == m));
  }
}

TEST_CASE("polylines of a torus grid are closed loops") {
  const QuadMesh t = make_torus_grid(6, 8, [](int i, int j) {
    const double a = 2 * fx::kPi * i / 6, b = 2 * fx::kPi * j / 8;
    return Vec3((3 + std::cos(a)) * std::cos(b), (3 + std::cos(a)) * std::sin(b), std::sin(a));
  });
  const PolylineSet p = trace_polylines(t);
  CHECK(p.polylines.size() == 14);
  for (const auto& pl : p.polylines) {
    CHECK(pl.closed);
    CHECK(consecutive_triples(pl.vertices, true).size() == pl.vertices.size());
  }
  for (const auto& s : p.strips) CHECK(s.closed);
}

TEST_CASE("variable count on a torus is 18 per face") {
  const QuadMesh t = make_torus_grid(5, 7, [](int i, int j) {
    const double a = 2 * fx::kPi * i / 5, b = 2 * fx::kPi * j / 7;
    return Vec3((3 + std::cos(a)) * std::cos(b), (3 + std::cos(a)) * std::sin(b), std::sin(a));
  });
  CHECK(t.vertex_count() == t.face_count());
  const VariableLayout layout(t);
  CHECK(layout.size() == 18 * t.face_count());
}

TEST_CASE("polylines stop at a valence-3 interior vertex") {
  // Three quads around vertex 0.
  const std::vector<Vec3> v = {Vec3(0, 0, 0),  Vec3(1, 0, 0),   Vec3(-0.5, 0.87, 0),
                               Vec3(-0.5, -0.87, 0), Vec3(0.7, 0.9, 0.1), Vec3(-1.1, 0, 0.1),
                               Vec3(0.7, -0.9, 0.1)};
  const QuadMesh m(v, {Face{0, 1, 4, 2}, Face{0, 2, 5, 3}, Face{0, 3, 6, 1}});
  CHECK(m.is_singular(0));
  CHECK(m.singular_vertices() == std::vector<int>{0});
  for (const auto& pl : trace_polylines(m).polylines) {
    for (std::size_t k = 1; k + 1 < pl.vertices.size(); ++k) CHECK(pl.vertices[k] != 0);
  }
}

TEST_CASE("orient_and_refresh_normals") {
  QuadMesh m = fx::sampled_grid(6, 6, fx::sheared_cone);
  SUBCASE("planar mesh gives one normal") {
    const QuadMesh p = fx::plane_grid(4, 4);
    State s = initial_state(p);
    orient_and_refresh_normals(p, s);
    for (int f = 0; f < p.face_count(); ++f) CHECK((s.normal(f) - s.normal(0)).norm() < 1e-15);
  }
  SUBCASE("idempotent without changes") {
    State s = initial_state(m);
    const Eigen::VectorXd before = s.x;
    orient_and_refresh_normals(m, s);
    CHECK((s.x - before).norm() == 0.0);
  }
  SUBCASE("stored sign is kept") {
    State s = initial_state(m);
    const State original = s;
    for (int f = 0; f < m.face_count(); ++f) s.set_normal(f, -s.normal(f));
    orient_and_refresh_normals(m, s);
    for (int f = 0; f < m.face_count(); ++f) CHECK((s.normal(f) + original.normal(f)).norm() < 1e-15);
  }
  SUBCASE("orientation survives small perturbations") {
    std::mt19937 rng(11);
    std::normal_distribution<double> n(0.0, 0.01);
    State s = initial_state(m);
    for (int round = 0; round < 5; ++round) {
      const State prev = s;
      for (int v = 0; v < m.vertex_count(); ++v) {
        const Vec3 p = s.position(v) + Vec3(n(rng), n(rng), n(rng));
        s.set_position(v, p);
        m.set_vertex(v, p);
      }
      orient_and_refresh_normals(m, s);
      for (int f = 0; f < m.face_count(); ++f) CHECK(s.normal(f).dot(prev.normal(f)) > 0.0);
    }
  }
}

TEST_CASE("align_normal_orientation flips and keeps residual magnitudes") {
  const QuadMesh m = fx::sampled_grid(5, 5, fx::sheared_cylinder);
  std::mt19937 rng(2);
  State s = fx::random_state(m, rng, 0.01);
  s.set_normal(6, -s.normal(6));
  s.set_normal(11, -s.normal(11));
  NormalBlock norm(m);
  RulingBlock rul(m);
  const Eigen::VectorXd n0 = fx::rows_of(norm, s), r0 = fx::rows_of(rul, s);
  CHECK(align_normal_orientation(m, s) == 2);
  const Eigen::VectorXd n1 = fx::rows_of(norm, s), r1 = fx::rows_of(rul, s);
  CHECK((n1.cwiseAbs() - n0.cwiseAbs()).norm() < 1e-15);
  for (int k = 0; k < r0.size() / 3; ++k)
    CHECK(std::abs(r1.segment<3>(3 * k).norm() - r0.segment<3>(3 * k).norm()) < 1e-15);
  CHECK(align_normal_orientation(m, s) == 0);
}

TEST_CASE("OBJ loading") {
  SUBCASE("2x2 grid") {
    std::istringstream in(
        "v 0 0 0\nv 1 0 0\nv 2 0 0\nv 0 1 0\nv 1 1 0\nv 2 1 0\nv 0 2 0\nv 1 2 0\nv 2 2 0\n"
        "f 1 2 5 4\nf 2 3 6 5\nf 4 5 8 7\nf 5 6 9 8\n");
    const QuadMesh m = read_obj(in);
    CHECK(m.vertex_count() == 9);
    CHECK(m.face_count() == 4);
    CHECK(m.singular_vertices().empty());
  }
  SUBCASE("triangle") {
    std::istringstream in("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\nf 1 2 3\n");
    try {
      read_obj(in);
      FAIL("accepted a triangle");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NonQuadFace);
      CHECK(e.elements() == std::vector<int>{1});
    }
  }
  SUBCASE("edge traversed twice in the same direction") {
    std::istringstream in("v 0 0 0\nv 1 0 0\nv 2 0 0\nv 0 1 0\nv 1 1 0\nv 2 1 0\nf 1 2 5 4\nf 2 5 6 3\n");
    try {
      read_obj(in);
      FAIL("accepted inconsistent orientation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InconsistentOrientation);
      CHECK_FALSE(e.elements().empty());
    }
  }
  SUBCASE("slash and negative indices") {
    std::istringstream in("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvt 0 0\nf -4/1 -3/1 3//1 4\n");
    const QuadMesh m = read_obj(in);
    CHECK(m.face(0) == Face{0, 1, 2, 3});
  }
  SUBCASE("no faces") {
    std::istringstream in("{\"version\": 1}\nv 0 0 0\n");
    try {
      read_obj(in);
      FAIL("accepted a mesh without faces");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
    }
  }
}

TEST_CASE("OBJ round trip") {
  std::mt19937 rng(5);
  const QuadMesh m = fx::random_mesh(rng);
  std::stringstream io;
  write_obj(m, io);
  const QuadMesh r = read_obj(io);
  REQUIRE(r.vertex_count() == m.vertex_count());
  REQUIRE(r.face_count() == m.face_count());
  for (int v = 0; v < m.vertex_count(); ++v) CHECK((r.vertex(v) - m.vertex(v)).norm() <= 1e-12);
  for (int f = 0; f < m.face_count(); ++f) CHECK(r.face(f) == m.face(f));
}
