#pragma once

#include <array>
#include <memory>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "devquad/mesh.hpp"
#include "devquad/reference.hpp"
#include "devquad/state.hpp"

namespace devquad {

// ---------------------------------------------------------------------------
// Per-element residuals. Quads are passed as their four corners v0..v3.

using Quad = std::array<Vec3, 4>;

// (<n, v2 - v0>, <n, v3 - v1>, |n|^2 - 1)
Vec3 normal_residuals(const Quad& q, const Vec3& n);
// r - n_left x n_right
Vec3 ruling_residual(const Vec3& r, const Vec3& n_left, const Vec3& n_right);
// (r1 - r3) x (r0 - r2) for the rulings of the boundary cycle e0..e3.
Vec3 dev_residual(const std::array<Vec3, 4>& r);
// det(r1 - r3, r0 - r2, n)
double dev_residual_det(const std::array<Vec3, 4>& r, const Vec3& n);
// a - 2b + c
Vec3 fairness_residual(const Vec3& a, const Vec3& b, const Vec3& c);
// Squared diagonal lengths and diagonal dot product, current minus reference.
Vec3 iso_residuals(const Quad& q, const Quad& reference);
// Diagonal invariants (|d0|^2, |d1|^2, <d0, d1>) of a quad.
Vec3 diagonal_invariants(const Quad& q);
// <p - b, n>
double glide_residual(const Vec3& p, const Vec3& barycenter, const Vec3& n);

Quad quad_of(const State& s, const Face& f);
Quad quad_of(std::span<const Vec3> positions, const Face& f);

// ---------------------------------------------------------------------------
// Residual blocks: one weighted family of rows with a sparse Jacobian.

enum class Family { Norm, Rul, Dev, FairV, FairN, Iso, Handle, Glide, Prox };
inline constexpr int kFamilyCount = 9;
std::string_view family_name(Family f);

enum class DevForm { Vector, Determinant };

using Triplets = std::vector<Eigen::Triplet<double>>;

class ResidualBlock {
 public:
  explicit ResidualBlock(double weight = 1.0) : weight_(weight) {}
  virtual ~ResidualBlock() = default;

  virtual Family family() const = 0;
  virtual int row_count() const = 0;

  // Unweighted rows. Jacobian entries use block-local rows and full state
  // columns; an entry is emitted for every declared footprint slot.
  virtual void evaluate(const State& s, std::span<double> rows, Triplets* jac) const = 0;

  // Between optimization rounds: closest points, reference geometry, ...
  virtual void refresh(const State&) {}

  double weight() const { return weight_; }
  void set_weight(double w) { weight_ = w; }

  // w * sum of squared rows
  double energy(const State& s) const;
  double raw_energy(const State& s) const;

 private:
  double weight_;
};

class NormalBlock final : public ResidualBlock {
 public:
  explicit NormalBlock(const QuadMesh& mesh, double weight = 1.0);
  Family family() const override { return Family::Norm; }
  int row_count() const override { return 3 * mesh_.face_count(); }
  void evaluate(const State& s, std::span<double> rows, Triplets* jac) const override;

 private:
  const QuadMesh& mesh_;
};

class RulingBlock final : public ResidualBlock {
 public:
  explicit RulingBlock(const QuadMesh& mesh, double weight = 1.0);
  Family family() const override { return Family::Rul; }
  int row_count() const override { return 3 * static_cast<int>(halfedges_.size()); }
  void evaluate(const State& s, std::span<double> rows, Triplets* jac) const override;

 private:
  const QuadMesh& mesh_;
  std::vector<int> halfedges_;
};

// Faces with a boundary halfedge carry no row.
class DevBlock final : public ResidualBlock {
 public:
  DevBlock(const QuadMesh& mesh, DevForm form, double weight = 1.0);
  Family family() const override { return Family::Dev; }
  int row_count() const override { return rows_per_face() * static_cast<int>(faces_.size()); }
  void evaluate(const State& s, std::span<double> rows, Triplets* jac) const override;

  DevForm form() const { return form_; }
  const std::vector<int>& faces() const { return faces_; }
  int rows_per_face() const { return form_ == DevForm::Vector ? 3 : 1; }

 private:
  const QuadMesh& mesh_;
  DevForm form_;
  std::vector<int> faces_;
};

class VertexFairnessBlock final : public ResidualBlock {
 public:
  VertexFairnessBlock(std::vector<std::array<int, 3>> triples, double weight = 1.0);
  Family family() const override { return Family::FairV; }
  int row_count() const override { return 3 * static_cast<int>(triples_.size()); }
  void evaluate(const State& s, std::span<double> rows, Triplets* jac) const override;

 private:
  std::vector<std::array<int, 3>> triples_;
};

class NormalFairnessBlock final : public ResidualBlock {
 public:
  NormalFairnessBlock(std::vector<std::array<int, 3>> triples, double weight = 1.0);
  Family family() const override { return Family::FairN; }
  int row_count() const override { return 3 * static_cast<int>(triples_.size()); }
  void evaluate(const State& s, std::span<double> rows, Triplets* jac) const override;

 private:
  std::vector<std::array<int, 3>> triples_;
};

// Which face f' each face is compared against.
enum class IsoPairing { Fixed, PreviousIterate };

class IsometryBlock final : public ResidualBlock {
 public:
  IsometryBlock(const QuadMesh& mesh, std::span<const Vec3> reference, IsoPairing pairing,
                double weight = 1.0);
  Family family() const override { return Family::Iso; }
  int row_count() const override { return 3 * mesh_.face_count(); }
  void evaluate(const State& s, std::span<double> rows, Triplets* jac) const override;
  void refresh(const State& s) override;

  IsoPairing pairing() const { return pairing_; }
  void set_reference(std::span<const Vec3> reference);

 private:
  const QuadMesh& mesh_;
  IsoPairing pairing_;
  std::vector<Vec3> invariants_;
};

class HandleBlock final : public ResidualBlock {
 public:
  // Throws Error{UnknownVertex} for out-of-range indices.
  HandleBlock(const QuadMesh& mesh, std::vector<std::pair<int, Vec3>> targets, double weight = 1.0);
  Family family() const override { return Family::Handle; }
  int row_count() const override { return 3 * static_cast<int>(targets_.size()); }
  void evaluate(const State& s, std::span<double> rows, Triplets* jac) const override;

  const std::vector<std::pair<int, Vec3>>& targets() const { return targets_; }

 private:
  std::vector<std::pair<int, Vec3>> targets_;
};

// Tangent-plane distance of cloud points to the face their closest point
// lands on. Points farther than `radius` from the mesh are inactive.
class GlideBlock final : public ResidualBlock {
 public:
  GlideBlock(const QuadMesh& mesh, std::vector<Vec3> cloud, double radius, double weight = 1.0);
  Family family() const override { return Family::Glide; }
  int row_count() const override { return static_cast<int>(active_.size()); }
  void evaluate(const State& s, std::span<double> rows, Triplets* jac) const override;
  void refresh(const State& s) override;

  // (cloud index, face) of the active points after the last refresh.
  const std::vector<std::pair<int, int>>& active() const { return active_; }
  // Set when the last refresh found no active point.
  bool empty_active_set_warning() const { return warning_; }
  double radius() const { return radius_; }
  const std::vector<Vec3>& cloud() const { return cloud_; }

 private:
  const QuadMesh& mesh_;
  std::vector<Vec3> cloud_;
  double radius_;
  std::vector<std::pair<int, int>> active_;
  bool warning_ = false;
};

// Plane distance to the closest reference point plus sqrt(lambda) times the
// point offset: 4 rows per vertex.
class ProxBlock final : public ResidualBlock {
 public:
  // Throws Error{ReferenceQueryFailure} for an empty reference.
  ProxBlock(const QuadMesh& mesh, std::shared_ptr<const ReferenceSurface> reference,
            double lambda = 0.01, double weight = 1.0);
  Family family() const override { return Family::Prox; }
  int row_count() const override { return 4 * static_cast<int>(vertices_.size()); }
  void evaluate(const State& s, std::span<double> rows, Triplets* jac) const override;
  void refresh(const State& s) override;

  double lambda() const { return lambda_; }
  const std::vector<ClosestPoint>& foot_points() const { return feet_; }

 private:
  std::shared_ptr<const ReferenceSurface> reference_;
  double lambda_;
  std::vector<int> vertices_;
  std::vector<ClosestPoint> feet_;
};

}  // namespace devquad
