#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "devquad/loft.hpp"
#include "devquad/material.hpp"
#include "devquad/projection.hpp"
#include "devquad/residuals.hpp"
#include "devquad/solver.hpp"

namespace devquad {

inline constexpr int kConfigVersion = 1;

struct HandleSpec {
  int vertex = -1;
  Vec3 target = Vec3::Zero();
};

struct GlidingSpec {
  std::string curves;   // OBJ with points or lines
  double radius = 0.0;  // 0: twice the mean edge length
};

struct JobConfig {
  int version = kConfigVersion;
  std::string input;
  std::string input_b;    // second loft curve
  std::string output;
  std::string report;
  std::string trace;
  std::string reference;  // OBJ of triangles and quads
  std::string strips_file;  // strip sidecar written by approximate

  Weights weights;
  SolverConfig solver;
  ProjectionConfig projection;
  DevForm dev_form = DevForm::Vector;
  MaterialMode material = MaterialMode::None;
  double tolerance = 1e-6;  // per interior face E_dev reported as converged

  bool fix_boundary = false;
  std::vector<int> fixed_vertices;
  std::vector<HandleSpec> handles;
  std::optional<GlidingSpec> gliding;
  std::vector<int> strip_polylines;
  LoftOptions loft;
};

// Default loft setup: boundary rows fixed, two-stage regularizer schedule.
JobConfig default_loft_config();

// Keys missing from `j` keep their value from `base`. Giving "weights"
// without "schedule" replaces the base schedule by constant weights.
// Throws Error{InvalidConfig} for unknown keys, negative weights, a missing
// or unsupported version and badly typed values.
JobConfig config_from_json(const nlohmann::json& j, JobConfig base = {});
nlohmann::json config_to_json(const JobConfig& config);
JobConfig load_config(const std::filesystem::path& path, JobConfig base = {});

// Applies "a.b.c=value" overrides on top of a JSON config. The value is
// parsed as JSON when possible and as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& assignment);

}  // namespace devquad
