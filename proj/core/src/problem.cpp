#include "devquad/problem.hpp"

#include <cmath>

#include "devquad/error.hpp"

namespace devquad {

Problem::Problem(const QuadMesh& mesh) : Problem(mesh, std::make_shared<const VariableLayout>(mesh)) {}

Problem::Problem(const QuadMesh& mesh, std::shared_ptr<const VariableLayout> layout)
    : mesh_(mesh), layout_(std::move(layout)) {
  column_map_.assign(layout_->size(), -1);
  int col = 0;
  for (int i = 0; i < layout_->size(); ++i) {
    if (i < layout_->normal_offset() && mesh.is_fixed(i / 3)) continue;
    column_map_[i] = col++;
  }
  free_count_ = col;
}

ResidualBlock& Problem::add(std::shared_ptr<ResidualBlock> block, double scale) {
  entries_.push_back({std::move(block), scale});
  return *entries_.back().block;
}

ResidualBlock* Problem::find(Family family) const {
  for (const Entry& e : entries_)
    if (e.block->family() == family) return e.block.get();
  return nullptr;
}

int Problem::row_count() const {
  int n = 0;
  for (const Entry& e : entries_)
    if (e.block->weight() * e.scale > 0.0) n += e.block->row_count();
  return n;
}

std::size_t Problem::structure_key() const {
  std::size_t key = 1469598103934665603ull;
  for (const Entry& e : entries_) {
    const bool on = e.block->weight() * e.scale > 0.0;
    key = (key ^ static_cast<std::size_t>(on ? e.block->row_count() + 1 : 0)) * 1099511628211ull;
  }
  return key;
}

void Problem::evaluate(const State& s, Eigen::VectorXd& rows, SparseMatrix* jac) const {
  const int m = row_count();
  rows.resize(m);
  Triplets all;
  Triplets local;
  std::vector<double> buf;
  int offset = 0;
  for (const Entry& e : entries_) {
    const double w = e.block->weight() * e.scale;
    if (!(w > 0.0)) continue;
    const double sw = std::sqrt(w);
    const int n = e.block->row_count();
    buf.assign(n, 0.0);
    local.clear();
    e.block->evaluate(s, buf, jac ? &local : nullptr);
    for (int i = 0; i < n; ++i) rows[offset + i] = sw * buf[i];
    if (jac) {
      for (const auto& t : local) {
        const int col = column_map_[t.col()];
        if (col >= 0) all.emplace_back(offset + t.row(), col, sw * t.value());
      }
    }
    offset += n;
  }
  if (jac) {
    jac->resize(m, free_count_);
    jac->setFromTriplets(all.begin(), all.end());
  }
}

double Problem::energy(const State& s) const {
  double e = 0.0;
  for (const Entry& entry : entries_) {
    const double w = entry.block->weight() * entry.scale;
    if (w > 0.0) e += w * entry.block->raw_energy(s);
  }
  return e;
}

FamilyEnergies Problem::raw_energies(const State& s) const {
  FamilyEnergies out{};
  for (const Entry& e : entries_) out[static_cast<int>(e.block->family())] += e.block->raw_energy(s);
  return out;
}

void Problem::refresh(State& s, bool refresh_normals) const {
  if (refresh_normals) align_normal_orientation(mesh_, s);
  for (const Entry& e : entries_) e.block->refresh(s);
}

void Problem::apply_step(State& s, const Eigen::VectorXd& step) const {
  for (int i = 0; i < layout_->size(); ++i)
    if (column_map_[i] >= 0) s.x[i] += step[column_map_[i]];
}

Eigen::VectorXd Problem::gather(const State& s) const {
  Eigen::VectorXd out(free_count_);
  for (int i = 0; i < layout_->size(); ++i)
    if (column_map_[i] >= 0) out[column_map_[i]] = s.x[i];
  return out;
}

State Problem::initial_state() const { return devquad::initial_state(mesh_, layout_); }

}  // namespace devquad
