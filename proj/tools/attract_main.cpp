#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "attract/analysis.hpp"
#include "attract/oracle.hpp"
#include "attract/parallel.hpp"
#include "attract/svg.hpp"

namespace {

int fail(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return 1;
}

bool write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << text;
  return static_cast<bool>(out);
}

void print_summary(const attract::AnalysisResult& result) {
  std::cout << "system: " << result.config.system_name << "\n";
  for (const attract::ManifoldResult& mr : result.manifolds) {
    std::cout << "  " << mr.label << ": invariance max_residual="
              << mr.invariance.max_residual
              << (mr.invariance.pass ? " (pass)" : " (FAIL)");
    if (mr.gated) {
      std::cout << " -> classification refused; rerun with --force to"
                   " override\n";
      continue;
    }
    std::cout << "\n    criterion=" << to_string(mr.classification->overall);
    for (const auto& [side, sc] : mr.classification->per_side) {
      std::cout << " [" << to_string(side) << ": " << to_string(sc.verdict)
                << "]";
    }
    std::cout << "\n    oracle=" << to_string(mr.oracle->verdict)
              << " contraction_ratio=" << mr.oracle->contraction_ratio
              << " escaped=" << mr.oracle->escaped << "/"
              << mr.oracle->seeds_used;
    std::cout << "\n    agreement=" << (*mr.agreement ? "yes" : "NO") << "\n";
  }
}

// A few short orbit traces make the picture readable without rerunning the
// whole oracle batch.
std::vector<attract::OrbitTrace> svg_orbits(
    const attract::AnalysisConfig& cfg) {
  std::vector<attract::OrbitTrace> traces;
  for (const attract::ManifoldEntry& entry : cfg.manifolds) {
    attract::ManifoldGeometry geom(entry.spec);
    attract::Rect window = cfg.oracle.window.value_or(geom.default_window());
    std::vector<attract::Vec2> seeds =
        attract::tube_seeds(geom, cfg.tube, 4);
    for (attract::Vec2 seed : seeds) {
      traces.push_back(attract::integrate_orbit(cfg.field, seed, cfg.oracle.h,
                                                cfg.oracle.T, geom, window));
    }
  }
  return traces;
}

int cmd_analyze(const std::string& config_path, bool force,
                const std::string& svg_override,
                const std::string& samples_override) {
  attract::AnalysisConfig cfg = attract::load_config(config_path);
  if (force) cfg.force = true;
  if (!svg_override.empty()) cfg.outputs.svg = svg_override;
  if (!samples_override.empty()) cfg.outputs.samples = samples_override;

  bool keep_samples = cfg.outputs.samples.has_value() ||
                      cfg.outputs.svg.has_value();
  attract::AnalysisResult result =
      attract::run_analysis(cfg, attract::par::from_env(), keep_samples);

  std::string report = attract::report_to_json(result).dump(2);
  report.push_back('\n');
  if (!write_text_file(cfg.outputs.report, report))
    return fail("cannot write report to " + cfg.outputs.report);

  if (cfg.outputs.samples) {
    std::ofstream out(*cfg.outputs.samples, std::ios::binary);
    if (!out) return fail("cannot write samples to " + *cfg.outputs.samples);
    attract::write_samples_csv(result, out);
  }

  if (cfg.outputs.svg) {
    std::ofstream out(*cfg.outputs.svg, std::ios::binary);
    if (!out) return fail("cannot write svg to " + *cfg.outputs.svg);
    attract::emit_svg(result, svg_orbits(cfg), out);
  }

  print_summary(result);
  std::cout << "report written to " << cfg.outputs.report << "\n";
  return result.exit_code;
}

int cmd_check_invariance(const std::string& config_path) {
  attract::AnalysisConfig cfg = attract::load_config(config_path);
  attract::par::ExecPolicy policy = attract::par::from_env();
  int exit_code = 0;
  for (const attract::ManifoldEntry& entry : cfg.manifolds) {
    attract::ManifoldGeometry geom(entry.spec);
    attract::InvarianceReport rep =
        attract::invariance_residual(cfg.field, geom, 256, 1e-8, policy);
    std::cout << entry.label << ": max_residual=" << rep.max_residual
              << " mean_residual=" << rep.mean_residual
              << " n_points=" << rep.n_points
              << " singular_skipped=" << rep.singular_skipped << " -> "
              << (rep.pass ? "pass" : "FAIL") << "\n";
    if (!rep.pass) exit_code = 2;
  }
  return exit_code;
}

int cmd_orbit(const std::string& config_path, const std::string& seed_str,
              double h_override, double T_override, int manifold_idx,
              const std::string& out_path) {
  attract::AnalysisConfig cfg = attract::load_config(config_path);
  if (manifold_idx < 0 ||
      manifold_idx >= static_cast<int>(cfg.manifolds.size()))
    return fail("manifold index out of range");

  attract::Vec2 seed;
  if (std::sscanf(seed_str.c_str(), "%lf,%lf", &seed.x, &seed.y) != 2)
    return fail("--seed expects X,Y");

  double h = h_override > 0.0 ? h_override : cfg.oracle.h;
  double T = T_override > 0.0 ? T_override : cfg.oracle.T;

  attract::ManifoldGeometry geom(cfg.manifolds[manifold_idx].spec);
  attract::Rect window = cfg.oracle.window.value_or(geom.default_window());
  attract::OrbitTrace trace =
      attract::integrate_orbit(cfg.field, seed, h, T, geom, window);

  if (out_path.empty()) {
    attract::write_orbit_csv(trace, std::cout);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) return fail("cannot write " + out_path);
    attract::write_orbit_csv(trace, out);
  }
  if (trace.escaped)
    std::cerr << "note: orbit left the window at t=" << trace.times.back()
              << "\n";
  if (trace.failed)
    std::cerr << "note: integration stopped early: " << trace.note << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invariant-manifold attractiveness analyzer"};
  app.require_subcommand(1);

  std::string config_path;
  bool force = false;
  std::string svg_path, samples_path;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "Run invariance gate, tube classification and orbit oracle");
  analyze->add_option("config", config_path, "JSON config file")->required();
  analyze->add_flag("--force", force,
                    "classify even when the invariance gate fails");
  analyze->add_option("--svg", svg_path, "write a diagnostic SVG here");
  analyze->add_option("--samples", samples_path,
                      "write the tube samples as CSV here");

  std::string check_config;
  CLI::App* check = app.add_subcommand(
      "check-invariance", "Evaluate the invariance residual gate only");
  check->add_option("config", check_config, "JSON config file")->required();

  std::string orbit_config, seed_str, orbit_out;
  double orbit_h = 0.0, orbit_T = 0.0;
  int manifold_idx = 0;
  CLI::App* orbit = app.add_subcommand(
      "orbit", "Integrate a single orbit and dump t,x,y,dist as CSV");
  // frees the short -h so the step-size option below can use --h
  orbit->set_help_flag("--help", "print this help message and exit");
  orbit->add_option("config", orbit_config, "JSON config file")->required();
  orbit->add_option("--seed", seed_str, "start point X,Y")->required();
  orbit->add_option("--h", orbit_h, "step size (default from config)");
  orbit->add_option("--T", orbit_T, "horizon (default from config)");
  orbit->add_option("--manifold", manifold_idx,
                    "index of the manifold distances are measured to");
  orbit->add_option("--out", orbit_out, "output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed())
      return cmd_analyze(config_path, force, svg_path, samples_path);
    if (check->parsed()) return cmd_check_invariance(check_config);
    if (orbit->parsed())
      return cmd_orbit(orbit_config, seed_str, orbit_h, orbit_T, manifold_idx,
                       orbit_out);
  } catch (const attract::ConfigError& e) {
    return fail(e.what());
  } catch (const std::exception& e) {
    return fail(e.what());
  }
  return 0;
}
