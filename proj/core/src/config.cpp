#include "devquad/config.hpp"

#include <fstream>
#include <set>

#include "devquad/error.hpp"

namespace devquad {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) bad("unknown key '" + where + (where.empty() ? "" : ".") + it.key() + "'");
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    bad(std::string("bad value for '") + key + "'");
  }
}

double read_weight(const json& j, const char* key, double fallback) {
  double w = fallback;
  read(j, key, w);
  if (!(w >= 0.0)) bad(std::string("weight '") + key + "' must be nonnegative");
  return w;
}

Weights weights_from(const json& j, Weights w) {
  check_keys(j, "weights", {"norm", "rul", "dev", "fair_v", "fair_n", "iso", "pos"});
  w.norm = read_weight(j, "norm", w.norm);
  w.rul = read_weight(j, "rul", w.rul);
  w.dev = read_weight(j, "dev", w.dev);
  w.fair_v = read_weight(j, "fair_v", w.fair_v);
  w.fair_n = read_weight(j, "fair_n", w.fair_n);
  w.iso = read_weight(j, "iso", w.iso);
  w.pos = read_weight(j, "pos", w.pos);
  return w;
}

json weights_to(const Weights& w) {
  return {{"norm", w.norm}, {"rul", w.rul}, {"dev", w.dev}, {"fair_v", w.fair_v},
          {"fair_n", w.fair_n}, {"iso", w.iso}, {"pos", w.pos}};
}

Vec3 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) bad("expected a 3-vector");
  try {
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  } catch (const json::exception&) {
    bad("expected a 3-vector of numbers");
  }
}

}  // namespace

JobConfig default_loft_config() {
  JobConfig c;
  c.fix_boundary = true;
  Weights first;
  first.fair_v = 0.1;
  first.fair_n = 1.0;
  first.rul = 10.0;
  first.dev = 10.0;
  first.iso = 0.1;
  Weights second = first;
  second.fair_v = 0.01;
  second.fair_n = 0.1;
  c.solver.stages = {{first, 4}, {second, 3}};
  c.weights = first;
  c.material = MaterialMode::Plastic;
  return c;
}

JobConfig config_from_json(const json& j, JobConfig base) {
  check_keys(j, "", {"version", "input", "input_b", "output", "report", "trace", "reference",
                     "strips_file", "weights", "schedule", "solver", "projection", "dev_form",
                     "material", "tolerance", "fix_boundary", "fixed_vertices", "handles",
                     "gliding", "strips", "loft"});
  JobConfig c = std::move(base);
  if (!j.contains("version")) bad("missing 'version'");
  read(j, "version", c.version);
  if (c.version != kConfigVersion) bad("unsupported config version " + std::to_string(c.version));
  read(j, "input", c.input);
  read(j, "input_b", c.input_b);
  read(j, "output", c.output);
  read(j, "report", c.report);
  read(j, "trace", c.trace);
  read(j, "reference", c.reference);
  read(j, "strips_file", c.strips_file);
  if (j.contains("weights")) {
    c.weights = weights_from(j["weights"], c.weights);
    if (!j.contains("schedule")) c.solver.stages.clear();
  }

  if (j.contains("schedule")) {
    if (!j["schedule"].is_array()) bad("'schedule' must be a list");
    c.solver.stages.clear();
    for (const json& s : j["schedule"]) {
      check_keys(s, "schedule[]", {"weights", "iterations"});
      ScheduleStage st;
      st.weights = s.contains("weights") ? weights_from(s["weights"], c.weights) : c.weights;
      read(s, "iterations", st.iterations);
      c.solver.stages.push_back(st);
    }
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    check_keys(s, "solver", {"damping", "max_iterations", "energy_threshold", "stagnation_tolerance",
                             "stagnation_window", "zero_regularizers", "refresh_normals"});
    read(s, "damping", c.solver.damping);
    read(s, "max_iterations", c.solver.max_iterations);
    read(s, "energy_threshold", c.solver.energy_threshold);
    read(s, "stagnation_tolerance", c.solver.stagnation_tolerance);
    read(s, "stagnation_window", c.solver.stagnation_window);
    read(s, "zero_regularizers", c.solver.zero_regularizers_on_stagnation);
    read(s, "refresh_normals", c.solver.refresh_normals);
    if (!(c.solver.damping > 0)) bad("damping must be positive");
    if (!(c.solver.energy_threshold > 0) || !(c.solver.stagnation_tolerance > 0))
      bad("thresholds must be positive");
    if (c.solver.max_iterations < 0 || c.solver.stagnation_window < 1) bad("bad iteration limits");
  }
  if (j.contains("projection")) {
    const json& p = j["projection"];
    check_keys(p, "projection", {"mu", "soft_iterations", "gram_regularizer", "improvement_tolerance",
                                 "max_outer_iterations", "constraint_tolerance",
                                 "constraint_iterations"});
    read(p, "mu", c.projection.mu);
    read(p, "soft_iterations", c.projection.soft_iterations);
    read(p, "gram_regularizer", c.projection.gram_regularizer);
    read(p, "improvement_tolerance", c.projection.improvement_tolerance);
    read(p, "max_outer_iterations", c.projection.max_outer_iterations);
    read(p, "constraint_tolerance", c.projection.constraint_tolerance);
    read(p, "constraint_iterations", c.projection.constraint_iterations);
    if (!(c.projection.mu > 0)) bad("mu must be positive");
  }
  if (j.contains("dev_form")) {
    std::string f;
    read(j, "dev_form", f);
    if (f == "vector") c.dev_form = DevForm::Vector;
    else if (f == "determinant") c.dev_form = DevForm::Determinant;
    else bad("dev_form must be 'vector' or 'determinant'");
  }
  if (j.contains("material")) {
    std::string m;
    read(j, "material", m);
    const auto mode = parse_material_mode(m);
    if (!mode) bad("material must be 'elastic', 'plastic' or 'none'");
    c.material = *mode;
  }
  read(j, "tolerance", c.tolerance);
  if (!(c.tolerance > 0)) bad("tolerance must be positive");
  read(j, "fix_boundary", c.fix_boundary);
  read(j, "fixed_vertices", c.fixed_vertices);
  if (j.contains("handles")) {
    if (!j["handles"].is_array()) bad("'handles' must be a list");
    for (const json& h : j["handles"]) {
      check_keys(h, "handles[]", {"vertex", "target"});
      HandleSpec spec;
      read(h, "vertex", spec.vertex);
      if (!h.contains("target")) bad("handle without target");
      spec.target = vec_from(h["target"]);
      c.handles.push_back(spec);
    }
  }
  if (j.contains("gliding")) {
    const json& g = j["gliding"];
    check_keys(g, "gliding", {"curves", "radius"});
    GlidingSpec spec;
    read(g, "curves", spec.curves);
    read(g, "radius", spec.radius);
    if (spec.radius < 0) bad("gliding radius must be nonnegative");
    c.gliding = spec;
  }
  read(j, "strips", c.strip_polylines);
  if (j.contains("loft")) {
    const json& l = j["loft"];
    check_keys(l, "loft", {"rows", "samples"});
    read(l, "rows", c.loft.rows);
    read(l, "samples", c.loft.samples);
  }
  return c;
}

json config_to_json(const JobConfig& c) {
  json j;
  j["version"] = c.version;
  j["input"] = c.input;
  j["input_b"] = c.input_b;
  j["output"] = c.output;
  j["report"] = c.report;
  j["trace"] = c.trace;
  j["reference"] = c.reference;
  j["strips_file"] = c.strips_file;
  j["weights"] = weights_to(c.weights);
  json stages = json::array();
  for (const auto& s : c.solver.stages)
    stages.push_back({{"weights", weights_to(s.weights)}, {"iterations", s.iterations}});
  j["schedule"] = stages;
  j["solver"] = {{"damping", c.solver.damping},
                 {"max_iterations", c.solver.max_iterations},
                 {"energy_threshold", c.solver.energy_threshold},
                 {"stagnation_tolerance", c.solver.stagnation_tolerance},
                 {"stagnation_window", c.solver.stagnation_window},
                 {"zero_regularizers", c.solver.zero_regularizers_on_stagnation},
                 {"refresh_normals", c.solver.refresh_normals}};
  j["projection"] = {{"mu", c.projection.mu},
                     {"soft_iterations", c.projection.soft_iterations},
                     {"gram_regularizer", c.projection.gram_regularizer},
                     {"improvement_tolerance", c.projection.improvement_tolerance},
                     {"max_outer_iterations", c.projection.max_outer_iterations},
                     {"constraint_tolerance", c.projection.constraint_tolerance},
                     {"constraint_iterations", c.projection.constraint_iterations}};
  j["dev_form"] = c.dev_form == DevForm::Vector ? "vector" : "determinant";
  j["material"] = std::string(to_string(c.material));
  j["tolerance"] = c.tolerance;
  j["fix_boundary"] = c.fix_boundary;
  j["fixed_vertices"] = c.fixed_vertices;
  json handles = json::array();
  for (const auto& h : c.handles)
    handles.push_back({{"vertex", h.vertex}, {"target", {h.target.x(), h.target.y(), h.target.z()}}});
  j["handles"] = handles;
  if (c.gliding) j["gliding"] = {{"curves", c.gliding->curves}, {"radius", c.gliding->radius}};
  j["strips"] = c.strip_polylines;
  j["loft"] = {{"rows", c.loft.rows}, {"samples", c.loft.samples}};
  return j;
}

JobConfig load_config(const std::filesystem::path& path, JobConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return config_from_json(j, std::move(base));
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) bad("override must look like key=value: " + assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) bad("bad override key: " + path);
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      (*node)[key] = value;
      break;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace devquad
