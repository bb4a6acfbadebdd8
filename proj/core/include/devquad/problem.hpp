#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "devquad/mesh.hpp"
#include "devquad/residuals.hpp"
#include "devquad/state.hpp"

namespace devquad {

using SparseMatrix = Eigen::SparseMatrix<double>;
using FamilyEnergies = std::array<double, kFamilyCount>;

// Weighted least-squares system over one mesh. Fixed vertices are removed
// from the columns, so the solver never moves them.
//
// Blocks are shared pointers so that several problems (for example the
// constraint part and the soft part of a projection run) can reuse the same
// block with different scale factors.
class Problem {
 public:
  explicit Problem(const QuadMesh& mesh);
  Problem(const QuadMesh& mesh, std::shared_ptr<const VariableLayout> layout);

  const QuadMesh& mesh() const { return mesh_; }
  const std::shared_ptr<const VariableLayout>& layout() const { return layout_; }

  ResidualBlock& add(std::shared_ptr<ResidualBlock> block, double scale = 1.0);
  template <class T, class... Args>
  T& emplace(Args&&... args) {
    auto block = std::make_shared<T>(std::forward<Args>(args)...);
    T& ref = *block;
    add(std::move(block));
    return ref;
  }

  struct Entry {
    std::shared_ptr<ResidualBlock> block;
    double scale = 1.0;
  };
  const std::vector<Entry>& entries() const { return entries_; }
  ResidualBlock* find(Family family) const;
  void set_scale(std::size_t entry, double scale) { entries_[entry].scale = scale; }

  // Column of each full-state variable in the reduced system, or -1.
  const std::vector<int>& column_map() const { return column_map_; }
  int free_count() const { return free_count_; }

  // Rows of blocks with zero effective weight are skipped.
  int row_count() const;
  // Weighted rows sqrt(w * scale) * r and their Jacobian in reduced columns.
  void evaluate(const State& s, Eigen::VectorXd& rows, SparseMatrix* jac) const;
  double energy(const State& s) const;
  // Unweighted per-family sums of squares; families not present are 0.
  FamilyEnergies raw_energies(const State& s) const;
  // Changes whenever the row structure may have changed.
  std::size_t structure_key() const;

  // Between rounds: optionally re-align normal orientation, then every block.
  void refresh(State& s, bool refresh_normals) const;

  void apply_step(State& s, const Eigen::VectorXd& step) const;
  Eigen::VectorXd gather(const State& s) const;

  State initial_state() const;

 private:
  const QuadMesh& mesh_;
  std::shared_ptr<const VariableLayout> layout_;
  std::vector<Entry> entries_;
  std::vector<int> column_map_;
  int free_count_ = 0;
};

}  // namespace devquad
