#include "devquad/residuals.hpp"

#include <cmath>

#include <Eigen/Geometry>

#include "devquad/error.hpp"
#include "devquad/frame.hpp"

namespace devquad {

using Mat3 = Eigen::Matrix3d;

namespace {

Mat3 skew(const Vec3& a) {
  Mat3 m;
  m << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
  return m;
}

void put_block(Triplets& t, int row, int col, const Mat3& m) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t.emplace_back(row + i, col + j, m(i, j));
}

void put_diag(Triplets& t, int row, int col, double d) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t.emplace_back(row + i, col + j, i == j ? d : 0.0);
}

void put_row(Triplets& t, int row, int col, const Vec3& g) {
  for (int j = 0; j < 3; ++j) t.emplace_back(row, col + j, g[j]);
}

void put3(std::span<double> rows, int at, const Vec3& r) {
  rows[at] = r.x();
  rows[at + 1] = r.y();
  rows[at + 2] = r.z();
}

}  // namespace

Vec3 normal_residuals(const Quad& q, const Vec3& n) {
  return {n.dot(q[2] - q[0]), n.dot(q[3] - q[1]), n.squaredNorm() - 1.0};
}

Vec3 ruling_residual(const Vec3& r, const Vec3& n_left, const Vec3& n_right) {
  return r - n_left.cross(n_right);
}

Vec3 dev_residual(const std::array<Vec3, 4>& r) { return (r[1] - r[3]).cross(r[0] - r[2]); }

double dev_residual_det(const std::array<Vec3, 4>& r, const Vec3& n) {
  return (r[1] - r[3]).cross(r[0] - r[2]).dot(n);
}

Vec3 fairness_residual(const Vec3& a, const Vec3& b, const Vec3& c) { return a - 2.0 * b + c; }

Vec3 diagonal_invariants(const Quad& q) {
  const Vec3 d0 = q[2] - q[0], d1 = q[3] - q[1];
  return {d0.squaredNorm(), d1.squaredNorm(), d0.dot(d1)};
}

Vec3 iso_residuals(const Quad& q, const Quad& reference) {
  return diagonal_invariants(q) - diagonal_invariants(reference);
}

double glide_residual(const Vec3& p, const Vec3& barycenter, const Vec3& n) {
  return (p - barycenter).dot(n);
}

Quad quad_of(const State& s, const Face& f) {
  return {s.position(f[0]), s.position(f[1]), s.position(f[2]), s.position(f[3])};
}

Quad quad_of(std::span<const Vec3> p, const Face& f) { return {p[f[0]], p[f[1]], p[f[2]], p[f[3]]}; }

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Norm: return "norm";
    case Family::Rul: return "rul";
    case Family::Dev: return "dev";
    case Family::FairV: return "fairV";
    case Family::FairN: return "fairN";
    case Family::Iso: return "iso";
    case Family::Handle: return "handle";
    case Family::Glide: return "glide";
    case Family::Prox: return "prox";
  }
  return "?";
}

double ResidualBlock::raw_energy(const State& s) const {
  std::vector<double> rows(row_count());
  evaluate(s, rows, nullptr);
  double e = 0.0;
  for (double r : rows) e += r * r;
  return e;
}

double ResidualBlock::energy(const State& s) const { return weight_ * raw_energy(s); }

// --- NormalBlock ------------------------------------------------------------

NormalBlock::NormalBlock(const QuadMesh& mesh, double weight) : ResidualBlock(weight), mesh_(mesh) {}

void NormalBlock::evaluate(const State& s, std::span<double> rows, Triplets* jac) const {
  const VariableLayout& L = *s.layout;
  for (int f = 0; f < mesh_.face_count(); ++f) {
    const Face& fc = mesh_.face(f);
    const Quad q = quad_of(s, fc);
    const Vec3 n = s.normal(f);
    put3(rows, 3 * f, normal_residuals(q, n));
    if (!jac) continue;
    const int row = 3 * f;
    put_row(*jac, row, L.normal(f), q[2] - q[0]);
    put_row(*jac, row, L.vertex(fc[2]), n);
    put_row(*jac, row, L.vertex(fc[0]), -n);
    put_row(*jac, row + 1, L.normal(f), q[3] - q[1]);
    put_row(*jac, row + 1, L.vertex(fc[3]), n);
    put_row(*jac, row + 1, L.vertex(fc[1]), -n);
    put_row(*jac, row + 2, L.normal(f), 2.0 * n);
  }
}

// --- RulingBlock ------------------------------------------------------------

RulingBlock::RulingBlock(const QuadMesh& mesh, double weight) : ResidualBlock(weight), mesh_(mesh) {
  for (int h = 0; h < mesh.halfedge_count(); ++h)
    if (!mesh.is_boundary_halfedge(h)) halfedges_.push_back(h);
}

void RulingBlock::evaluate(const State& s, std::span<double> rows, Triplets* jac) const {
  const VariableLayout& L = *s.layout;
  for (std::size_t k = 0; k < halfedges_.size(); ++k) {
    const int h = halfedges_[k];
    const int f = QuadMesh::face_of(h), g = mesh_.neighbor(h);
    const Vec3 nf = s.normal(f), ng = s.normal(g);
    const int row = 3 * static_cast<int>(k);
    put3(rows, row, ruling_residual(s.ruling(h), nf, ng));
    if (!jac) continue;
    put_diag(*jac, row, L.ruling(h), 1.0);
    put_block(*jac, row, L.normal(f), skew(ng));
    put_block(*jac, row, L.normal(g), -skew(nf));
  }
}

// --- DevBlock ---------------------------------------------------------------

DevBlock::DevBlock(const QuadMesh& mesh, DevForm form, double weight)
    : ResidualBlock(weight), mesh_(mesh), form_(form) {
  for (int f = 0; f < mesh.face_count(); ++f)
    if (mesh.is_interior_face(f)) faces_.push_back(f);
}

void DevBlock::evaluate(const State& s, std::span<double> rows, Triplets* jac) const {
  const VariableLayout& L = *s.layout;
  for (std::size_t k = 0; k < faces_.size(); ++k) {
    const int f = faces_[k];
    const std::array<Vec3, 4> r{s.ruling(4 * f), s.ruling(4 * f + 1), s.ruling(4 * f + 2),
                                s.ruling(4 * f + 3)};
    const Vec3 a = r[1] - r[3], b = r[0] - r[2];
    if (form_ == DevForm::Vector) {
      const int row = 3 * static_cast<int>(k);
      put3(rows, row, a.cross(b));
      if (!jac) continue;
      const Mat3 da = -skew(b), db = skew(a);
      put_block(*jac, row, L.ruling(4 * f + 1), da);
      put_block(*jac, row, L.ruling(4 * f + 3), -da);
      put_block(*jac, row, L.ruling(4 * f + 0), db);
      put_block(*jac, row, L.ruling(4 * f + 2), -db);
    } else {
      const int row = static_cast<int>(k);
      const Vec3 n = s.normal(f);
      rows[row] = a.cross(b).dot(n);
      if (!jac) continue;
      const Vec3 ga = b.cross(n), gb = n.cross(a);
      put_row(*jac, row, L.ruling(4 * f + 1), ga);
      put_row(*jac, row, L.ruling(4 * f + 3), -ga);
      put_row(*jac, row, L.ruling(4 * f + 0), gb);
      put_row(*jac, row, L.ruling(4 * f + 2), -gb);
      put_row(*jac, row, L.normal(f), a.cross(b));
    }
  }
}

// --- fairness ---------------------------------------------------------------

VertexFairnessBlock::VertexFairnessBlock(std::vector<std::array<int, 3>> triples, double weight)
    : ResidualBlock(weight), triples_(std::move(triples)) {}

void VertexFairnessBlock::evaluate(const State& s, std::span<double> rows, Triplets* jac) const {
  const VariableLayout& L = *s.layout;
  for (std::size_t k = 0; k < triples_.size(); ++k) {
    const auto& t = triples_[k];
    const int row = 3 * static_cast<int>(k);
    put3(rows, row, fairness_residual(s.position(t[0]), s.position(t[1]), s.position(t[2])));
    if (!jac) continue;
    put_diag(*jac, row, L.vertex(t[0]), 1.0);
    put_diag(*jac, row, L.vertex(t[1]), -2.0);
    put_diag(*jac, row, L.vertex(t[2]), 1.0);
  }
}

NormalFairnessBlock::NormalFairnessBlock(std::vector<std::array<int, 3>> triples, double weight)
    : ResidualBlock(weight), triples_(std::move(triples)) {}

void NormalFairnessBlock::evaluate(const State& s, std::span<double> rows, Triplets* jac) const {
  const VariableLayout& L = *s.layout;
  for (std::size_t k = 0; k < triples_.size(); ++k) {
    const auto& t = triples_[k];
    const int row = 3 * static_cast<int>(k);
    put3(rows, row, fairness_residual(s.normal(t[0]), s.normal(t[1]), s.normal(t[2])));
    if (!jac) continue;
    put_diag(*jac, row, L.normal(t[0]), 1.0);
    put_diag(*jac, row, L.normal(t[1]), -2.0);
    put_diag(*jac, row, L.normal(t[2]), 1.0);
  }
}

// --- IsometryBlock ----------------------------------------------------------

IsometryBlock::IsometryBlock(const QuadMesh& mesh, std::span<const Vec3> reference,
                             IsoPairing pairing, double weight)
    : ResidualBlock(weight), mesh_(mesh), pairing_(pairing) {
  set_reference(reference);
}

void IsometryBlock::set_reference(std::span<const Vec3> reference) {
  if (static_cast<int>(reference.size()) != mesh_.vertex_count())
    throw Error(ErrorCode::CountMismatch, "isometry reference needs one point per vertex");
  invariants_.resize(mesh_.face_count());
  for (int f = 0; f < mesh_.face_count(); ++f)
    invariants_[f] = diagonal_invariants(quad_of(reference, mesh_.face(f)));
}

void IsometryBlock::refresh(const State& s) {
  if (pairing_ == IsoPairing::PreviousIterate) set_reference(s.positions());
}

void IsometryBlock::evaluate(const State& s, std::span<double> rows, Triplets* jac) const {
  const VariableLayout& L = *s.layout;
  for (int f = 0; f < mesh_.face_count(); ++f) {
    const Face& fc = mesh_.face(f);
    const Quad q = quad_of(s, fc);
    const int row = 3 * f;
    put3(rows, row, diagonal_invariants(q) - invariants_[f]);
    if (!jac) continue;
    const Vec3 d0 = q[2] - q[0], d1 = q[3] - q[1];
    put_row(*jac, row, L.vertex(fc[2]), 2.0 * d0);
    put_row(*jac, row, L.vertex(fc[0]), -2.0 * d0);
    put_row(*jac, row + 1, L.vertex(fc[3]), 2.0 * d1);
    put_row(*jac, row + 1, L.vertex(fc[1]), -2.0 * d1);
    put_row(*jac, row + 2, L.vertex(fc[2]), d1);
    put_row(*jac, row + 2, L.vertex(fc[0]), -d1);
    put_row(*jac, row + 2, L.vertex(fc[3]), d0);
    put_row(*jac, row + 2, L.vertex(fc[1]), -d0);
  }
}

// --- HandleBlock ------------------------------------------------------------

HandleBlock::HandleBlock(const QuadMesh& mesh, std::vector<std::pair<int, Vec3>> targets,
                         double weight)
    : ResidualBlock(weight), targets_(std::move(targets)) {
  for (const auto& [v, p] : targets_)
    if (v < 0 || v >= mesh.vertex_count())
      throw Error(ErrorCode::UnknownVertex, "handle on a vertex that does not exist", {v});
}

void HandleBlock::evaluate(const State& s, std::span<double> rows, Triplets* jac) const {
  const VariableLayout& L = *s.layout;
  for (std::size_t k = 0; k < targets_.size(); ++k) {
    const auto& [v, target] = targets_[k];
    const int row = 3 * static_cast<int>(k);
    put3(rows, row, s.position(v) - target);
    if (jac) put_diag(*jac, row, L.vertex(v), 1.0);
  }
}

// --- GlideBlock -------------------------------------------------------------

GlideBlock::GlideBlock(const QuadMesh& mesh, std::vector<Vec3> cloud, double radius, double weight)
    : ResidualBlock(weight), mesh_(mesh), cloud_(std::move(cloud)), radius_(radius) {}

void GlideBlock::refresh(const State& s) {
  active_.clear();
  const std::vector<Vec3> pos = s.positions();
  const ReferenceSurface surface = ReferenceSurface::from_quads(pos, mesh_.faces());
  if (!surface.empty()) {
    for (int i = 0; i < static_cast<int>(cloud_.size()); ++i) {
      const ClosestPoint cp = surface.closest_point(cloud_[i]);
      if (cp.distance <= radius_) active_.emplace_back(i, cp.primitive / 2);
    }
  }
  warning_ = active_.empty();
}

void GlideBlock::evaluate(const State& s, std::span<double> rows, Triplets* jac) const {
  const VariableLayout& L = *s.layout;
  for (std::size_t k = 0; k < active_.size(); ++k) {
    const auto [i, f] = active_[k];
    const Face& fc = mesh_.face(f);
    const Quad q = quad_of(s, fc);
    const Vec3 b = 0.25 * (q[0] + q[1] + q[2] + q[3]);
    const Vec3 n = s.normal(f);
    const int row = static_cast<int>(k);
    rows[row] = glide_residual(cloud_[i], b, n);
    if (!jac) continue;
    put_row(*jac, row, L.normal(f), cloud_[i] - b);
    for (int c = 0; c < 4; ++c) put_row(*jac, row, L.vertex(fc[c]), -0.25 * n);
  }
}

// --- ProxBlock --------------------------------------------------------------

ProxBlock::ProxBlock(const QuadMesh& mesh, std::shared_ptr<const ReferenceSurface> reference,
                     double lambda, double weight)
    : ResidualBlock(weight), reference_(std::move(reference)), lambda_(lambda) {
  if (!reference_ || reference_->empty())
    throw Error(ErrorCode::ReferenceQueryFailure, "reference surface is empty");
  for (int v = 0; v < mesh.vertex_count(); ++v) vertices_.push_back(v);
  feet_.resize(vertices_.size());
}

void ProxBlock::refresh(const State& s) {
  for (std::size_t k = 0; k < vertices_.size(); ++k)
    feet_[k] = reference_->closest_point(s.position(vertices_[k]));
}

void ProxBlock::evaluate(const State& s, std::span<double> rows, Triplets* jac) const {
  const VariableLayout& L = *s.layout;
  const double sl = std::sqrt(lambda_);
  for (std::size_t k = 0; k < vertices_.size(); ++k) {
    const int v = vertices_[k];
    const Vec3 d = s.position(v) - feet_[k].point;
    const int row = 4 * static_cast<int>(k);
    rows[row] = d.dot(feet_[k].normal);
    put3(rows, row + 1, sl * d);
    if (!jac) continue;
    put_row(*jac, row, L.vertex(v), feet_[k].normal);
    put_diag(*jac, row + 1, L.vertex(v), sl);
  }
}

}  // namespace devquad
