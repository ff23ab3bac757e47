#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "attract/criterion.hpp"
#include "attract/geometry.hpp"
#include "attract/invariance.hpp"
#include "attract/oracle.hpp"

namespace attract {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

// Configuration error with the offending field path ("tube.eps_min",
// "manifolds[1].g", ...).
struct ConfigError : std::runtime_error {
  ConfigError(std::string path_in, const std::string& what);
  std::string path;
};

struct ManifoldEntry {
  std::string label;
  ManifoldSpec spec;
  ordered_json raw;  // normalized JSON form, echoed into reports
};

struct OracleConfig {
  double h = 1e-3;
  double T = 10.0;
  std::optional<Rect> window;  // default: 4x manifold bounding box
};

struct OutputsConfig {
  std::string report = "report.json";
  std::optional<std::string> samples;
  std::optional<std::string> svg;
};

struct AnalysisConfig {
  std::string system_name;
  std::string fx_src;
  std::string fy_src;
  VectorField field;
  std::vector<ManifoldEntry> manifolds;
  TubeConfig tube;
  OracleConfig oracle;
  OutputsConfig outputs;
  bool force = false;
};

AnalysisConfig config_from_json(const ordered_json& j);
AnalysisConfig load_config(const std::string& path);
ordered_json config_to_json(const AnalysisConfig& cfg);

// Consistency between the tube verdict and what orbit integration can see:
// definite verdicts must match, Neutral expects Inconclusive, Indefinite
// accepts Inconclusive or Repulsive (transverse escape dominates the vote).
bool verdicts_consistent(OverallVerdict criterion, OracleResult oracle);

struct ManifoldResult {
  std::string label;
  InvarianceReport invariance;
  bool gated = false;  // invariance failed and force was off
  std::optional<ManifoldClassification> classification;
  std::optional<std::vector<TubeSample>> samples;
  std::optional<OracleVerdict> oracle;
  Rect oracle_window;  // effective window the oracle actually used
  std::optional<bool> agreement;
};

struct AnalysisResult {
  AnalysisConfig config;
  std::vector<ManifoldResult> manifolds;
  double invariance_ms = 0.0;
  double criterion_ms = 0.0;
  double oracle_ms = 0.0;
  double total_ms = 0.0;
  int exit_code = 0;  // 2 when any manifold failed the invariance gate
};

// Full pipeline: invariance gate, tube classification, oracle, agreement.
// keep_samples controls whether raw tube samples are retained for CSV/SVG
// output.
AnalysisResult run_analysis(const AnalysisConfig& cfg,
                            const par::ExecPolicy& policy = {},
                            bool keep_samples = false);

// Report JSON. Identical for identical configs except for the "timings"
// object.
ordered_json report_to_json(const AnalysisResult& result);

void write_samples_csv(const AnalysisResult& result, std::ostream& out);

}  // namespace attract
