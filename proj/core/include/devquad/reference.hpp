#pragma once

#include <array>
#include <memory>
#include <vector>

#include "devquad/mesh.hpp"

namespace devquad {

struct ClosestPoint {
  Vec3 point;
  Vec3 normal;  // unit
  int primitive = -1;
  double distance = 0.0;
};

// Target geometry for proximity and gliding terms: a triangle mesh or an
// oriented point cloud behind a bounding-volume hierarchy.
class ReferenceSurface {
 public:
  ReferenceSurface();
  ~ReferenceSurface();
  ReferenceSurface(ReferenceSurface&&) noexcept;
  ReferenceSurface& operator=(ReferenceSurface&&) noexcept;

  static ReferenceSurface from_triangles(std::vector<Vec3> vertices,
                                         std::vector<std::array<int, 3>> triangles);
  // Each quad q becomes triangles 2q and 2q+1 (split along v0-v2).
  static ReferenceSurface from_quads(std::span<const Vec3> vertices, std::span<const Face> quads);
  static ReferenceSurface from_point_cloud(std::vector<Vec3> points, std::vector<Vec3> normals);

  bool empty() const;
  bool is_point_cloud() const;
  int primitive_count() const;

  // Exact closest point on the triangles (or the nearest cloud point).
  // Equidistant candidates resolve to the lowest primitive id. The normal
  // interpolates area-weighted vertex normals. Throws Error{EmptyReference}.
  ClosestPoint closest_point(const Vec3& query) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Closest point on triangle abc with barycentric weights of the result.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                               Vec3* barycentric = nullptr);

}  // namespace devquad
