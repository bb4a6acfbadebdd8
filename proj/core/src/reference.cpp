#include "devquad/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Geometry>

#include "devquad/error.hpp"

namespace devquad {

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                               Vec3* bary) {
  auto out = [&](double u, double v, double w) {
    if (bary) *bary = Vec3(u, v, w);
    return Vec3(u * a + v * b + w * c);
  };
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return out(1, 0, 0);
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return out(0, 1, 0);
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) {
    const double v = d1 / (d1 - d3);
    return out(1 - v, v, 0);
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return out(0, 0, 1);
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) {
    const double w = d2 / (d2 - d6);
    return out(1 - w, 0, w);
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return out(0, 1 - w, w);
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  return out(1 - v - w, v, w);
}

namespace {

struct Box {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());
  void grow(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void grow(const Box& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  double squared_distance(const Vec3& p) const {
    const Vec3 d = (lo - p).cwiseMax(Vec3::Zero()).cwiseMax(p - hi);
    return d.squaredNorm();
  }
};

struct Node {
  Box box;
  int left = -1, right = -1;  // children; leaves have left < 0
  int begin = 0, end = 0;     // primitive range in `order`
};

constexpr int kLeafSize = 4;

}  // namespace

struct ReferenceSurface::Impl {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Vec3> vertex_normals;
  bool cloud = false;

  std::vector<Box> boxes;
  std::vector<Vec3> centers;
  std::vector<int> order;
  std::vector<Node> nodes;

  int count() const { return cloud ? static_cast<int>(vertices.size()) : static_cast<int>(triangles.size()); }

  void build() {
    const int n = count();
    boxes.resize(n);
    centers.resize(n);
    for (int i = 0; i < n; ++i) {
      Box b;
      if (cloud) {
        b.grow(vertices[i]);
      } else {
        for (int k = 0; k < 3; ++k) b.grow(vertices[triangles[i][k]]);
      }
      boxes[i] = b;
      centers[i] = 0.5 * (b.lo + b.hi);
    }
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
    nodes.clear();
    if (n > 0) build_node(0, n);
  }

  int build_node(int begin, int end) {
    const int id = static_cast<int>(nodes.size());
    nodes.push_back({});
    Box box, cbox;
    for (int i = begin; i < end; ++i) {
      box.grow(boxes[order[i]]);
      cbox.grow(centers[order[i]]);
    }
    nodes[id].box = box;
    nodes[id].begin = begin;
    nodes[id].end = end;
    if (end - begin <= kLeafSize) return id;
    int axis = 0;
    (cbox.hi - cbox.lo).maxCoeff(&axis);
    const int mid = (begin + end) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                     [&](int a, int b) {
                       if (centers[a][axis] != centers[b][axis]) return centers[a][axis] < centers[b][axis];
                       return a < b;
                     });
    const int l = build_node(begin, mid);
    const int r = build_node(mid, end);
    nodes[id].left = l;
    nodes[id].right = r;
    return id;
  }

  void compute_vertex_normals() {
    vertex_normals.assign(vertices.size(), Vec3::Zero());
    for (const auto& t : triangles) {
      const Vec3 n = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
      for (int k = 0; k < 3; ++k) vertex_normals[t[k]] += n;  // area weighted
    }
    for (Vec3& n : vertex_normals) {
      const double len = n.norm();
      if (len > 0) n /= len;
    }
  }

  // Squared distance and closest point to one primitive.
  double primitive_distance(int i, const Vec3& q, Vec3& point, Vec3& normal) const {
    if (cloud) {
      point = vertices[i];
      normal = vertex_normals[i];
      return (q - point).squaredNorm();
    }
    const auto& t = triangles[i];
    Vec3 bary;
    point = closest_point_on_triangle(q, vertices[t[0]], vertices[t[1]], vertices[t[2]], &bary);
    normal = bary[0] * vertex_normals[t[0]] + bary[1] * vertex_normals[t[1]] +
             bary[2] * vertex_normals[t[2]];
    const double len = normal.norm();
    if (len > 1e-300) {
      normal /= len;
    } else {
      normal = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).normalized();
    }
    return (q - point).squaredNorm();
  }
};

ReferenceSurface::ReferenceSurface() : impl_(std::make_unique<Impl>()) {}
ReferenceSurface::~ReferenceSurface() = default;
ReferenceSurface::ReferenceSurface(ReferenceSurface&&) noexcept = default;
ReferenceSurface& ReferenceSurface::operator=(ReferenceSurface&&) noexcept = default;

ReferenceSurface ReferenceSurface::from_triangles(std::vector<Vec3> vertices,
                                                  std::vector<std::array<int, 3>> triangles) {
  ReferenceSurface s;
  for (std::size_t i = 0; i < triangles.size(); ++i)
    for (int k = 0; k < 3; ++k)
      if (triangles[i][k] < 0 || triangles[i][k] >= static_cast<int>(vertices.size()))
        throw Error(ErrorCode::InvalidIndex, "triangle references a missing vertex", {static_cast<int>(i)});
  s.impl_->vertices = std::move(vertices);
  s.impl_->triangles = std::move(triangles);
  s.impl_->compute_vertex_normals();
  s.impl_->build();
  return s;
}

ReferenceSurface ReferenceSurface::from_quads(std::span<const Vec3> vertices,
                                              std::span<const Face> quads) {
  std::vector<std::array<int, 3>> tris;
  tris.reserve(2 * quads.size());
  for (const Face& q : quads) {
    tris.push_back({q[0], q[1], q[2]});
    tris.push_back({q[0], q[2], q[3]});
  }
  return from_triangles(std::vector<Vec3>(vertices.begin(), vertices.end()), std::move(tris));
}

ReferenceSurface ReferenceSurface::from_point_cloud(std::vector<Vec3> points,
                                                    std::vector<Vec3> normals) {
  if (points.size() != normals.size())
    throw Error(ErrorCode::CountMismatch, "point cloud needs one normal per point");
  ReferenceSurface s;
  for (Vec3& n : normals) {
    const double len = n.norm();
    if (!(len > 0)) throw Error(ErrorCode::DegenerateInput, "zero normal in point cloud");
    n /= len;
  }
  s.impl_->cloud = true;
  s.impl_->vertices = std::move(points);
  s.impl_->vertex_normals = std::move(normals);
  s.impl_->build();
  return s;
}

bool ReferenceSurface::empty() const { return impl_->count() == 0; }
bool ReferenceSurface::is_point_cloud() const { return impl_->cloud; }
int ReferenceSurface::primitive_count() const { return impl_->count(); }

ClosestPoint ReferenceSurface::closest_point(const Vec3& q) const {
  if (empty()) throw Error(ErrorCode::EmptyReference, "reference surface has no primitives");
  const Impl& m = *impl_;
  double best = std::numeric_limits<double>::infinity();
  ClosestPoint result;
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = m.nodes[stack[--top]];
    if (node.box.squared_distance(q) > best) continue;
    if (node.left < 0) {
      for (int k = node.begin; k < node.end; ++k) {
        const int i = m.order[k];
        Vec3 p, n;
        const double d = m.primitive_distance(i, q, p, n);
        if (d < best || (d == best && i < result.primitive)) {
          best = d;
          result.point = p;
          result.normal = n;
          result.primitive = i;
        }
      }
      continue;
    }
    const double dl = m.nodes[node.left].box.squared_distance(q);
    const double dr = m.nodes[node.right].box.squared_distance(q);
    // push the farther child first so the nearer one is visited next
    if (dl <= dr) {
      stack[top++] = node.right;
      stack[top++] = node.left;
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  result.distance = std::sqrt(best);
  return result;
}

}  // namespace devquad
