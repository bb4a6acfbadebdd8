#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string_view>

#include "devquad/problem.hpp"

namespace devquad {

// Elastic: isometric to the mesh the session started from.
// Plastic: isometric to the previous iterate.
enum class MaterialMode { Elastic, Plastic, None };

std::string_view to_string(MaterialMode mode);
std::optional<MaterialMode> parse_material_mode(std::string_view text);

// Adds the isometry block for `mode` to the problem, or nothing for None.
// `reference` is the original geometry used by the elastic mode.
std::shared_ptr<IsometryBlock> configure_material(Problem& problem, MaterialMode mode,
                                                  std::span<const Vec3> reference,
                                                  double weight);

}  // namespace devquad
