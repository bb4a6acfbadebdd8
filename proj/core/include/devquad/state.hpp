#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "devquad/mesh.hpp"

namespace devquad {

// Index map of the unknowns: 3 coordinates per vertex, 3 per face normal,
// 3 per interior halfedge ruling, laid out in that order.
class VariableLayout {
 public:
  explicit VariableLayout(const QuadMesh& mesh);

  int vertex(int v) const { return 3 * v; }
  int normal(int f) const { return normal_offset_ + 3 * f; }
  // -1 for boundary halfedges, which carry no ruling.
  int ruling(int h) const { return ruling_slot_[h] < 0 ? -1 : ruling_offset_ + 3 * ruling_slot_[h]; }

  int size() const { return size_; }
  int vertex_count() const { return normal_offset_ / 3; }
  int face_count() const { return (ruling_offset_ - normal_offset_) / 3; }
  int ruling_count() const { return (size_ - ruling_offset_) / 3; }
  int normal_offset() const { return normal_offset_; }
  int ruling_offset() const { return ruling_offset_; }

 private:
  int normal_offset_ = 0;
  int ruling_offset_ = 0;
  int size_ = 0;
  std::vector<int> ruling_slot_;
};

// Flat vector of all unknowns together with the layout that indexes it.
struct State {
  std::shared_ptr<const VariableLayout> layout;
  Eigen::VectorXd x;

  Vec3 position(int v) const { return x.segment<3>(layout->vertex(v)); }
  Vec3 normal(int f) const { return x.segment<3>(layout->normal(f)); }
  Vec3 ruling(int h) const {
    const int i = layout->ruling(h);
    return i < 0 ? Vec3::Zero() : Vec3(x.segment<3>(i));
  }
  void set_position(int v, const Vec3& p) { x.segment<3>(layout->vertex(v)) = p; }
  void set_normal(int f, const Vec3& n) { x.segment<3>(layout->normal(f)) = n; }
  void set_ruling(int h, const Vec3& r) {
    const int i = layout->ruling(h);
    if (i >= 0) x.segment<3>(i) = r;
  }

  std::vector<Vec3> positions() const;
};

// Normals from the checkerboard frames, rulings n_f x n_f' for every
// interior halfedge (f left, f' right). Throws Error{DegenerateFace}.
State initial_state(const QuadMesh& mesh);
State initial_state(const QuadMesh& mesh, std::shared_ptr<const VariableLayout> layout);

// Replaces every normal by the frame normal of the current positions, with
// the sign that agrees best with the normal it replaces.
void orient_and_refresh_normals(const QuadMesh& mesh, State& state);

// Flips every normal variable pointing away from its frame normal, and
// negates the rulings of edges with exactly one flipped face so that the
// normal and ruling residuals keep their magnitude. Faces with a vanishing
// diagonal cross product are left alone. Returns the number of flips.
int align_normal_orientation(const QuadMesh& mesh, State& state);

// Recomputes every ruling from the current normal variables.
void derive_rulings(const QuadMesh& mesh, State& state);

}  // namespace devquad
