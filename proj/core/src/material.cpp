#include "devquad/material.hpp"

namespace devquad {

std::string_view to_string(MaterialMode mode) {
  switch (mode) {
    case MaterialMode::Elastic: return "elastic";
    case MaterialMode::Plastic: return "plastic";
    case MaterialMode::None: return "none";
  }
  return "none";
}

std::optional<MaterialMode> parse_material_mode(std::string_view text) {
  if (text == "elastic") return MaterialMode::Elastic;
  if (text == "plastic") return MaterialMode::Plastic;
  if (text == "none") return MaterialMode::None;
  return std::nullopt;
}

std::shared_ptr<IsometryBlock> configure_material(Problem& problem, MaterialMode mode,
                                                  std::span<const Vec3> reference,
                                                  double weight) {
  if (mode == MaterialMode::None) return nullptr;
  auto block = std::make_shared<IsometryBlock>(
      problem.mesh(), reference,
      mode == MaterialMode::Elastic ? IsoPairing::Fixed : IsoPairing::PreviousIterate, weight);
  problem.add(block);
  return block;
}

}  // namespace devquad
