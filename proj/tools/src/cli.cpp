#include "cli.hpp"

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "devquad/error.hpp"
#include "devquad/gauss.hpp"
#include "devquad/obj_io.hpp"
#include "devquad/rulings.hpp"
#include "devquad/server.hpp"
#include "devquad/workflow.hpp"

namespace devquad {

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

struct JobFlags {
  std::string config;
  std::vector<std::string> sets;
  std::string output;
  std::string report;
  std::string trace;
  std::string dev_form;
  std::string material;
  int max_iterations = -1;
  double tolerance = -1;
  bool fix_boundary = false;
};

void add_job_flags(CLI::App* app, JobFlags& f) {
  app->add_option("-c,--config", f.config, "JSON job config");
  app->add_option("--set", f.sets, "Override a config key, e.g. weights.dev=10");
  app->add_option("-o,--output", f.output, "Output OBJ");
  app->add_option("--report", f.report, "Validation report CSV");
  app->add_option("--trace", f.trace, "Energy trace CSV");
  app->add_option("--dev-form", f.dev_form, "vector or determinant");
  app->add_option("--material", f.material, "elastic, plastic or none");
  app->add_option("--max-iterations", f.max_iterations, "LM iteration cap");
  app->add_option("--tolerance", f.tolerance, "Per-face E_dev counted as converged");
  app->add_flag("--fix-boundary", f.fix_boundary, "Keep boundary vertices in place");
}

JobConfig resolve_config(const JobFlags& f, JobConfig base) {
  nlohmann::json j = {{"version", kConfigVersion}};
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + f.config);
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, f.config + ": " + e.what());
    }
  }
  for (const auto& s : f.sets) apply_override(j, s);
  auto set = [&](const std::string& key, nlohmann::json value) {
    apply_override(j, key + "=" + value.dump());
  };
  if (!f.output.empty()) set("output", f.output);
  if (!f.report.empty()) set("report", f.report);
  if (!f.trace.empty()) set("trace", f.trace);
  if (!f.dev_form.empty()) set("dev_form", f.dev_form);
  if (!f.material.empty()) set("material", f.material);
  if (f.max_iterations >= 0) set("solver.max_iterations", f.max_iterations);
  if (f.tolerance > 0) set("tolerance", f.tolerance);
  if (f.fix_boundary) set("fix_boundary", true);
  return config_from_json(j, std::move(base));
}

void write_outputs(const JobConfig& c, const QuadMesh& mesh, const ValidationReport& report,
                   const std::vector<TraceRow>* trace) {
  if (!c.output.empty()) save_mesh(mesh, c.output);
  if (!c.report.empty()) {
    std::ofstream out(c.report);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + c.report);
    write_report_csv(report, out);
  }
  if (trace && !c.trace.empty()) {
    std::ofstream out(c.trace);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + c.trace);
    write_trace_csv(*trace, out);
  }
}

void print_summary(std::ostream& out, const ValidationReport& r) {
  out << "status " << r.status << "\n"
      << "faces " << r.faces << " interior " << r.interior_faces << "\n"
      << "E_dev total " << r.dev_total << " per face " << r.dev_per_face << " (det form "
      << r.dev_per_face_det << ")\n"
      << "E_dev median " << r.dev_median << " max " << r.dev_max << "\n"
      << "gauss degeneracy max " << r.gauss.max << " median " << r.gauss.median << "\n"
      << "boundary drift " << r.boundary_drift << "\n"
      << "iterations " << r.iterations << " seconds " << r.seconds << "\n";
}

int exit_for(const ValidationReport& r) { return r.status == "unreachable" ? 2 : 0; }

ProblemInputs inputs_for(const JobConfig& c) {
  ProblemInputs in;
  if (c.gliding) {
    if (c.gliding->curves.empty()) throw Error(ErrorCode::InvalidConfig, "gliding needs 'curves'");
    in.glide_cloud = load_points(c.gliding->curves);
  }
  if (!c.reference.empty())
    in.reference = std::make_shared<const ReferenceSurface>(load_reference(c.reference));
  return in;
}

JobConfig optimize_defaults() {
  JobConfig c = default_loft_config();
  c.fix_boundary = false;
  return c;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Developable quad mesh optimization"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  JobFlags opt_flags, loft_flags, approx_flags;
  std::string opt_mesh, opt_reference, opt_glide;
  auto* optimize_cmd = app.add_subcommand("optimize", "Optimize a quad mesh for developability");
  optimize_cmd->add_option("mesh", opt_mesh, "Input OBJ")->required();
  optimize_cmd->add_option("--reference", opt_reference, "Reference surface OBJ (proximity)");
  optimize_cmd->add_option("--glide", opt_glide, "Curve or point OBJ to glide along");
  add_job_flags(optimize_cmd, opt_flags);

  std::string curve_a, curve_b;
  int rows = -1, samples = -1;
  auto* loft_cmd = app.add_subcommand("loft", "Loft a developable between two curves");
  loft_cmd->add_option("curve_a", curve_a, "First curve OBJ")->required();
  loft_cmd->add_option("curve_b", curve_b, "Second curve OBJ")->required();
  loft_cmd->add_option("--rows", rows, "Vertex rows including both curves");
  loft_cmd->add_option("--samples", samples, "Samples per curve (default: keep input points)");
  add_job_flags(loft_cmd, loft_flags);

  std::string approx_mesh, approx_reference, strips_file;
  std::vector<int> strip_ids;
  auto* approx_cmd = app.add_subcommand("approximate", "Piecewise developable approximation");
  approx_cmd->add_option("mesh", approx_mesh, "Input quad mesh OBJ")->required();
  approx_cmd->add_option("--reference", approx_reference, "Reference surface OBJ");
  approx_cmd->add_option("--strips", strip_ids, "Polyline ids to cut along")->delimiter(',');
  approx_cmd->add_option("--strips-file", strips_file, "Write the strip decomposition as JSON");
  add_job_flags(approx_cmd, approx_flags);

  std::string rul_mesh, rul_out;
  double rul_scale = 0.0;
  double rul_angle = 15.0;
  auto* rulings_cmd = app.add_subcommand("rulings", "Prospective rulings of an unoptimized mesh");
  rulings_cmd->add_option("mesh", rul_mesh, "Input OBJ")->required();
  rulings_cmd->add_option("-o,--output", rul_out, "Ruling line set OBJ");
  rulings_cmd->add_option("--scale", rul_scale, "Half length of drawn segments (default: mean edge)");
  rulings_cmd->add_option("--angle", rul_angle, "Tangency angle threshold in degrees");

  std::string gauss_mesh, gauss_out;
  auto* gauss_cmd = app.add_subcommand("gauss", "Gauss image of a mesh");
  gauss_cmd->add_option("mesh", gauss_mesh, "Input OBJ")->required();
  gauss_cmd->add_option("-o,--output", gauss_out, "Gauss image line set OBJ");

  std::string val_mesh, val_report;
  double val_tol = 1e-6;
  auto* validate_cmd = app.add_subcommand("validate", "Developability report of a mesh");
  validate_cmd->add_option("mesh", val_mesh, "Input OBJ")->required();
  validate_cmd->add_option("--report", val_report, "Report CSV");
  validate_cmd->add_option("--tolerance", val_tol, "Per-face E_dev counted as developable");

  ServerOptions server;
  int port = 7878;
  auto* serve_cmd = app.add_subcommand("serve", "Run the interactive session service");
  serve_cmd->add_option("--host", server.host, "Address to bind");
  serve_cmd->add_option("--port", port, "TCP port (0: any)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (optimize_cmd->parsed()) {
      JobFlags f = opt_flags;
      if (!opt_reference.empty()) f.sets.push_back("reference=\"" + opt_reference + "\"");
      if (!opt_glide.empty()) f.sets.push_back("gliding.curves=\"" + opt_glide + "\"");
      const JobConfig c = resolve_config(f, optimize_defaults());
      const OptimizeOutcome o = optimize(load_mesh(opt_mesh), c, inputs_for(c));
      write_outputs(c, o.mesh, o.report, &o.lm.trace);
      print_summary(out, o.report);
      return exit_for(o.report);
    }
    if (loft_cmd->parsed()) {
      JobFlags f = loft_flags;
      if (rows > 0) f.sets.push_back("loft.rows=" + std::to_string(rows));
      if (samples >= 0) f.sets.push_back("loft.samples=" + std::to_string(samples));
      const JobConfig c = resolve_config(f, default_loft_config());
      const auto a = load_curves(curve_a), b = load_curves(curve_b);
      if (a.empty() || b.empty()) throw Error(ErrorCode::CountMismatch, "curve file holds no curve");
      const OptimizeOutcome o = loft(a.front(), b.front(), c);
      write_outputs(c, o.mesh, o.report, &o.lm.trace);
      print_summary(out, o.report);
      return exit_for(o.report);
    }
    if (approx_cmd->parsed()) {
      JobFlags f = approx_flags;
      if (!approx_reference.empty()) f.sets.push_back("reference=\"" + approx_reference + "\"");
      if (!strip_ids.empty()) {
        std::string list = "strips=[";
        for (std::size_t i = 0; i < strip_ids.size(); ++i) list += (i ? "," : "") + std::to_string(strip_ids[i]);
        f.sets.push_back(list + "]");
      }
      if (!strips_file.empty()) f.sets.push_back("strips_file=\"" + strips_file + "\"");
      const JobConfig c = resolve_config(f, default_approximate_config());
      if (c.reference.empty()) throw Error(ErrorCode::InvalidConfig, "approximate needs --reference");
      auto ref = std::make_shared<const ReferenceSurface>(load_reference(c.reference));
      const ApproximationOutcome o = approximate(load_mesh(approx_mesh), ref, c);
      write_outputs(c, o.mesh, o.report, nullptr);
      if (!c.strips_file.empty()) {
        std::ofstream s(c.strips_file);
        if (!s) throw Error(ErrorCode::Io, "cannot write " + c.strips_file);
        write_strips_json(o.strips, s);
      }
      out << "strips " << o.strips.strips.size() << "\n";
      print_summary(out, o.report);
      return exit_for(o.report);
    }
    if (rulings_cmd->parsed()) {
      const QuadMesh mesh = load_mesh(rul_mesh);
      RulingOptions ro;
      ro.tangency_angle_deg = rul_angle;
      const RulingLineField field = prospective_rulings(mesh, ro);
      int zero = 0;
      for (const auto& l : field.lines) zero += l.zero ? 1 : 0;
      out << "rulings " << field.lines.size() << " zero " << zero << "\n"
          << "tangent boundary edges " << field.flagged_boundary_halfedges.size() << "\n"
          << "warnings " << field.warnings.size() << "\n";
      for (const auto& w : field.warnings) {
        out << "  run of " << w.halfedges.size() << " edges from vertex " << mesh.from(w.halfedges.front())
            << " to " << mesh.to(w.halfedges.back()) << "\n";
      }
      if (!rul_out.empty()) {
        std::ofstream o(rul_out);
        if (!o) throw Error(ErrorCode::Io, "cannot write " + rul_out);
        write_ruling_obj(field, rul_scale > 0 ? rul_scale : 0.5 * mesh.mean_edge_length(), o);
      }
      return 0;
    }
    if (gauss_cmd->parsed()) {
      const GaussImage g = gauss_image(load_mesh(gauss_mesh));
      out << "points " << g.points.size() << " segments " << g.segments.size() << "\n"
          << "degeneracy max " << g.stats.max << " median " << g.stats.median << " mean "
          << g.stats.mean << "\n"
          << "mean normal gap " << g.stats.mean_gap << "\n";
      if (!gauss_out.empty()) {
        std::ofstream o(gauss_out);
        if (!o) throw Error(ErrorCode::Io, "cannot write " + gauss_out);
        write_gauss_obj(g, o);
      }
      return 0;
    }
    if (validate_cmd->parsed()) {
      ValidationReport r = validate(load_mesh(val_mesh));
      r.status = r.dev_per_face <= val_tol ? "developable" : "not-developable";
      if (!val_report.empty()) {
        std::ofstream o(val_report);
        if (!o) throw Error(ErrorCode::Io, "cannot write " + val_report);
        write_report_csv(r, o);
      }
      print_summary(out, r);
      return 0;
    }
    if (serve_cmd->parsed()) {
      if (port < 0 || port > 65535) throw Error(ErrorCode::InvalidConfig, "bad port");
      server.port = static_cast<std::uint16_t>(port);
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      serve(server, g_stop, [&](std::uint16_t p) { out << "listening on " << server.host << ':' << p << std::endl; });
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << app.help();
  return 1;
}

}  // namespace devquad
