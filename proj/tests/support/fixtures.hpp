#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "devquad/loft.hpp"
#include "devquad/mesh.hpp"
#include "devquad/polylines.hpp"
#include "devquad/reference.hpp"
#include "devquad/residuals.hpp"
#include "devquad/state.hpp"

namespace devquad::fixtures {

inline constexpr double kPi = std::numbers::pi;

// Grid over the unit parameter square: u = i / (rows - 1), v = j / (cols - 1).
inline QuadMesh sampled_grid(int rows, int cols, const std::function<Vec3(double, double)>& f) {
  return make_grid(rows, cols, false, [&](int i, int j) {
    return f(static_cast<double>(i) / (rows - 1), static_cast<double>(j) / (cols - 1));
  });
}

inline QuadMesh plane_grid(int rows, int cols, double spacing = 1.0) {
  return make_grid(rows, cols, false,
                   [&](int i, int j) { return Vec3(j * spacing, i * spacing, 0.0); });
}

// Parameter lines run diagonally to the rulings in the three samplings
// below: the grid direction (u, v) maps to (angle, height) = (u + 0.6 v, v).
inline Vec3 sheared_cylinder(double u, double v) {
  const double phi = 1.2 * (u + 0.6 * v);
  return {std::cos(phi), std::sin(phi), 1.5 * v - 0.3 * u};
}

// Cone with apex at the origin, away from the apex.
inline Vec3 sheared_cone(double u, double v) {
  const double phi = 1.2 * (u + 0.6 * v);
  const double rho = 1.0 + 0.8 * v + 0.3 * u;
  return {rho * std::cos(phi), rho * std::sin(phi), 0.7 * rho};
}

// Tangent surface of a helix, s > 0 keeps clear of the edge of regression.
inline Vec3 sheared_tangent_developable(double u, double v) {
  const double t = 1.0 * (u + 0.5 * v);
  const double s = 0.4 + 0.8 * v + 0.2 * u;
  const Vec3 c(std::cos(t), std::sin(t), 0.5 * t);
  const Vec3 dc(-std::sin(t), std::cos(t), 0.5);
  return c + s * dc;
}

inline Polyline3 ellipse(int n, double a, double b, double z) {
  Polyline3 p;
  p.closed = true;
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * kPi * i / n;
    p.points.emplace_back(a * std::cos(t), b * std::sin(t), z);
  }
  return p;
}

inline Polyline3 segment(const Vec3& a, const Vec3& b, int n) {
  Polyline3 p;
  for (int i = 0; i < n; ++i) p.points.push_back(a + (b - a) * (static_cast<double>(i) / (n - 1)));
  return p;
}

// Height-perturbed, jittered grid with between 9 and 100 faces.
inline QuadMesh random_mesh(std::mt19937& rng) {
  std::uniform_int_distribution<int> size(4, 11);
  int rows = size(rng), cols = size(rng);
  while ((rows - 1) * (cols - 1) > 100) --cols;
  std::uniform_real_distribution<double> jitter(-0.15, 0.15);
  std::uniform_real_distribution<double> coef(-0.4, 0.4);
  const double a = coef(rng), b = coef(rng), c = coef(rng);
  return make_grid(rows, cols, false, [&](int i, int j) {
    const double x = j + jitter(rng), y = i + jitter(rng);
    return Vec3(x, y, a * x * x / cols + b * x * y / rows + c * std::sin(y) + jitter(rng));
  });
}

// Frame-derived state with every variable perturbed, so that no residual
// vanishes by construction.
inline State random_state(const QuadMesh& mesh, std::mt19937& rng, double noise = 0.05) {
  State s = initial_state(mesh);
  std::normal_distribution<double> n(0.0, noise);
  for (Eigen::Index i = 0; i < s.x.size(); ++i) s.x[i] += n(rng);
  return s;
}

inline std::vector<std::array<int, 3>> vertex_triples(const QuadMesh& mesh) {
  std::vector<std::array<int, 3>> t;
  for (const auto& pl : trace_polylines(mesh).polylines)
    for (const auto& tr : consecutive_triples(pl.vertices, pl.closed)) t.push_back(tr);
  return t;
}

inline std::vector<std::array<int, 3>> face_triples(const QuadMesh& mesh) {
  std::vector<std::array<int, 3>> t;
  for (const auto& st : trace_polylines(mesh).strips)
    for (const auto& tr : consecutive_triples(st.faces, st.closed)) t.push_back(tr);
  return t;
}

inline Eigen::MatrixXd dense_jacobian(const ResidualBlock& block, const State& s) {
  std::vector<double> rows(block.row_count());
  Triplets trip;
  block.evaluate(s, rows, &trip);
  Eigen::SparseMatrix<double> j(block.row_count(), s.x.size());
  j.setFromTriplets(trip.begin(), trip.end());
  return Eigen::MatrixXd(j);
}

inline Eigen::VectorXd rows_of(const ResidualBlock& block, const State& s) {
  Eigen::VectorXd r(block.row_count());
  block.evaluate(s, std::span<double>(r.data(), static_cast<std::size_t>(r.size())), nullptr);
  return r;
}

// ||J - J_fd||_F / ||J_fd||_F with central differences of step
// 1e-6 * max(1, |x_i|).
inline double jacobian_relative_error(const ResidualBlock& block, const State& s) {
  const Eigen::MatrixXd j = dense_jacobian(block, s);
  Eigen::MatrixXd fd(j.rows(), j.cols());
  State p = s;
  for (Eigen::Index c = 0; c < s.x.size(); ++c) {
    const double h = 1e-6 * std::max(1.0, std::abs(s.x[c]));
    p.x[c] = s.x[c] + h;
    const Eigen::VectorXd plus = rows_of(block, p);
    p.x[c] = s.x[c] - h;
    const Eigen::VectorXd minus = rows_of(block, p);
    p.x[c] = s.x[c];
    fd.col(c) = (plus - minus) / (2.0 * h);
  }
  const double denom = std::max(fd.norm(), 1e-300);
  return (j - fd).norm() / denom;
}

inline double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2) return *mid;
  return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

// x -> (A x + t) / (1 + <c, x>), mildly conditioned.
inline Vec3 projective(const Vec3& p) {
  Eigen::Matrix3d a;
  a << 1.0, 0.1, 0.0, 0.0, 0.9, 0.05, 0.02, 0.0, 1.1;
  const Vec3 c(0.05, 0.03, 0.04);
  return (a * p + Vec3(0.1, 0.0, 0.0)) / (1.0 + c.dot(p));
}

// Triangulated cylinder of radius r around the y axis, touching z = 0 along
// the line x = 0: (r sin phi, y, r (1 - cos phi)).
inline ReferenceSurface cylinder_reference(double r, double half_angle, double half_length, int n) {
  const QuadMesh grid = make_grid(n, n, false, [&](int i, int j) {
    const double phi = -half_angle + 2.0 * half_angle * j / (n - 1);
    const double y = -half_length + 2.0 * half_length * i / (n - 1);
    return Vec3(r * std::sin(phi), y, r * (1.0 - std::cos(phi)));
  });
  return ReferenceSurface::from_quads(grid.vertices(), grid.faces());
}

inline double cylinder_distance(const Vec3& p, double r) {
  return std::abs(std::hypot(p.x(), p.z() - r) - r);
}

}  // namespace devquad::fixtures
