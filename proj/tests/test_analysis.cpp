#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <doctest.h>

#include "attract/analysis.hpp"
#include "attract/svg.hpp"

using namespace attract;
namespace fs = std::filesystem;

namespace {

std::string fixture(const char* name) {
  return std::string(ATTRACT_FIXTURE_DIR) + "/" + name;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const char* name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// runs the CLI with the given arguments from inside dir, returns the exit code
int run_cli(const fs::path& dir, const std::string& args) {
  std::string cmd = "cd " + dir.string() + " && " + ATTRACT_BIN + " " + args +
                    " > cli_stdout.txt 2> cli_stderr.txt";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

AnalysisConfig quick_config(const char* name) {
  AnalysisConfig cfg = load_config(fixture(name));
  cfg.oracle.h = 1e-2;  // cheap oracle settings for unit-test speed
  cfg.oracle.T = 1.0;
  return cfg;
}

}  // namespace

TEST_CASE("fixtures load with expected shapes") {
  AnalysisConfig focus = load_config(fixture("focus_stable.json"));
  CHECK(focus.system_name == "stable focus");
  CHECK(focus.fx_src == "-x + y");
  REQUIRE(focus.manifolds.size() == 1);
  CHECK(focus.manifolds[0].label == "origin");
  CHECK(std::holds_alternative<EquilibriumSpec>(focus.manifolds[0].spec));
  CHECK(focus.tube.eps_max == 0.25);  // defaults fill unset sections
  CHECK(focus.oracle.h == 1e-3);
  CHECK(focus.oracle.window.has_value());
  CHECK(focus.outputs.report == "report.json");
  CHECK(!focus.force);

  AnalysisConfig sm = load_config(fixture("saddle_manifolds.json"));
  REQUIRE(sm.manifolds.size() == 2);
  CHECK(sm.manifolds[0].label == "unstable_y0");
  CHECK(sm.manifolds[1].label == "stable_x0");
  CHECK(std::holds_alternative<GraphSpec>(sm.manifolds[0].spec));

  AnalysisConfig lc = load_config(fixture("limit_cycle.json"));
  REQUIRE(lc.manifolds.size() == 1);
  CHECK(std::holds_alternative<ParametricSpec>(lc.manifolds[0].spec));
}

TEST_CASE("config validation points at the offending field") {
  auto expect_error = [](const char* json_text, const char* needle) {
    try {
      config_from_json(ordered_json::parse(json_text));
      FAIL_CHECK("expected ConfigError for " << json_text);
    } catch (const ConfigError& e) {
      std::string what = e.what();
      INFO(what);
      CHECK(what.find(needle) != std::string::npos);
    }
  };

  expect_error(R"({"field": {"fx": "x", "fy": "y"},
                   "manifolds": [{"type": "equilibrium", "px": 0, "py": 0}]})",
               "system_name");
  expect_error(R"({"system_name": "s",
                   "manifolds": [{"type": "equilibrium", "px": 0, "py": 0}]})",
               "field");
  expect_error(R"({"system_name": "s", "field": {"fx": "x"},
                   "manifolds": [{"type": "equilibrium", "px": 0, "py": 0}]})",
               "field.fy");
  expect_error(R"({"system_name": "s", "field": {"fx": "x", "fy": "y"},
                   "manifolds": []})",
               "manifolds");
  expect_error(R"({"system_name": "s", "field": {"fx": "x", "fy": "y"},
                   "manifolds": [{"type": "torus"}]})",
               "manifolds[0].type");
  expect_error(R"({"system_name": "s", "field": {"fx": "x", "fy": "y"},
                   "manifolds": [{"type": "graph", "g": "x", "h": "y",
                                  "domain": [0, 1]}]})",
               "manifolds[0]");
  expect_error(R"({"system_name": "s", "field": {"fx": "x", "fy": "y"},
                   "manifolds": [{"type": "equilibrium", "px": 0, "py": 0}],
                   "tube": {"eps_min": -1}})",
               "tube.eps_min");
  expect_error(R"({"system_name": "s", "field": {"fx": "x", "fy": "y"},
                   "manifolds": [{"type": "graph", "g": "x",
                                  "domain": [2, 1]}]})",
               "domain");

  SUBCASE("expression errors keep their offsets") {
    try {
      config_from_json(ordered_json::parse(
          R"({"system_name": "s", "field": {"fx": "x +", "fy": "y"},
              "manifolds": [{"type": "equilibrium", "px": 0, "py": 0}]})"));
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      std::string what = e.what();
      CHECK(what.find("field.fx") != std::string::npos);
      CHECK(what.find("offset 3") != std::string::npos);
    }
  }
}

TEST_CASE("verdict agreement table") {
  using OV = OverallVerdict;
  using OR = OracleResult;
  CHECK(verdicts_consistent(OV::Attractive, OR::Attractive));
  CHECK(!verdicts_consistent(OV::Attractive, OR::Repulsive));
  CHECK(!verdicts_consistent(OV::Attractive, OR::Inconclusive));
  CHECK(verdicts_consistent(OV::Repulsive, OR::Repulsive));
  CHECK(!verdicts_consistent(OV::Repulsive, OR::Attractive));
  CHECK(verdicts_consistent(OV::Neutral, OR::Inconclusive));
  CHECK(!verdicts_consistent(OV::Neutral, OR::Attractive));
  CHECK(verdicts_consistent(OV::Indefinite, OR::Inconclusive));
  CHECK(verdicts_consistent(OV::Indefinite, OR::Repulsive));
  CHECK(!verdicts_consistent(OV::Indefinite, OR::Attractive));
  CHECK(verdicts_consistent(OV::Mixed, OR::Inconclusive));
  CHECK(!verdicts_consistent(OV::Mixed, OR::Repulsive));
}

TEST_CASE("config echo is a normalization fixed point") {
  for (const char* name :
       {"limit_cycle.json", "saddle_manifolds.json", "non_invariant.json"}) {
    AnalysisConfig cfg = load_config(fixture(name));
    ordered_json echo = config_to_json(cfg);
    AnalysisConfig reloaded = config_from_json(echo);
    CHECK(config_to_json(reloaded).dump() == echo.dump());
    CHECK(reloaded.system_name == cfg.system_name);
    CHECK(reloaded.fx_src == cfg.fx_src);
    CHECK(reloaded.fy_src == cfg.fy_src);
    CHECK(reloaded.manifolds.size() == cfg.manifolds.size());
    CHECK(reloaded.tube.eps_max == cfg.tube.eps_max);
    CHECK(reloaded.oracle.T == cfg.oracle.T);
  }
}

TEST_CASE("analysis report structure") {
  AnalysisConfig cfg = quick_config("center.json");
  AnalysisResult result = run_analysis(cfg);
  CHECK(result.exit_code == 0);
  REQUIRE(result.manifolds.size() == 1);
  const ManifoldResult& mr = result.manifolds[0];
  CHECK(mr.invariance.pass);
  CHECK(!mr.gated);
  REQUIRE(mr.classification.has_value());
  CHECK(mr.classification->overall == OverallVerdict::Neutral);
  REQUIRE(mr.oracle.has_value());
  CHECK(mr.oracle->verdict == OracleResult::Inconclusive);
  REQUIRE(mr.agreement.has_value());
  CHECK(*mr.agreement);

  ordered_json j = report_to_json(result);
  CHECK(j["tool"] == "attract");
  CHECK(j["system_name"] == "linear center");
  CHECK(j["config"]["field"]["fx"] == "y");
  CHECK(j["notes"].is_array());
  CHECK(j["timings"].size() == 4);
  REQUIRE(j["manifolds"].size() == 1);
  const ordered_json& m = j["manifolds"][0];
  CHECK(m["label"] == "origin");
  CHECK(m["invariance"]["pass"] == true);
  CHECK(m["gated"] == false);
  CHECK(m["criterion"]["overall"] == "neutral");
  CHECK(m["criterion"]["per_side"]["radial"]["verdict"] == "neutral");
  CHECK(m["oracle"]["verdict"] == "inconclusive");
  CHECK(m["agreement"] == true);

  SUBCASE("reports are deterministic apart from timings") {
    ordered_json j2 = report_to_json(run_analysis(cfg));
    j.erase("timings");
    j2.erase("timings");
    CHECK(j.dump() == j2.dump());
  }
}

TEST_CASE("gate refuses classification of a non-invariant candidate") {
  AnalysisConfig cfg = quick_config("non_invariant.json");
  AnalysisResult result = run_analysis(cfg);
  CHECK(result.exit_code == 2);
  REQUIRE(result.manifolds.size() == 1);
  CHECK(result.manifolds[0].gated);
  CHECK(!result.manifolds[0].classification.has_value());
  CHECK(!result.manifolds[0].oracle.has_value());

  ordered_json j = report_to_json(result);
  CHECK(j["manifolds"][0]["gated"] == true);
  CHECK(j["manifolds"][0]["criterion"].is_null());
  CHECK(j["manifolds"][0]["oracle"].is_null());

  SUBCASE("force overrides the gate") {
    cfg.force = true;
    AnalysisResult forced = run_analysis(cfg);
    CHECK(forced.exit_code == 0);
    REQUIRE(forced.manifolds[0].classification.has_value());
    CHECK(forced.manifolds[0].classification->overall ==
          OverallVerdict::Mixed);
    CHECK(!forced.manifolds[0].gated);
  }
}

TEST_CASE("variant cycle field passes the gate but is indefinite") {
  AnalysisConfig cfg = load_config(fixture("limit_cycle_variant.json"));
  ManifoldGeometry geom(cfg.manifolds[0].spec);
  InvarianceReport inv = invariance_residual(cfg.field, geom, 256);
  CHECK(inv.pass);
  ManifoldClassification cls = classify_manifold(cfg.field, geom, cfg.tube);
  CHECK(cls.overall == OverallVerdict::Indefinite);
}

TEST_CASE("samples csv") {
  AnalysisConfig cfg = quick_config("saddle.json");
  AnalysisResult result = run_analysis(cfg, {}, true);
  REQUIRE(result.manifolds[0].samples.has_value());

  std::ostringstream out;
  write_samples_csv(result, out);
  std::istringstream in(out.str());
  std::string header;
  REQUIRE(std::getline(in, header));
  CHECK(header ==
        "manifold,side,arc_param,offset,base_x,base_y,normal_x,normal_y,"
        "sample_x,sample_y,fx,fy,ip,excluded,reason");

  int rows = 0;
  std::string line;
  bool saw_radial = false;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 14);
    if (line.find(",radial,") != std::string::npos) saw_radial = true;
  }
  CHECK(rows == static_cast<int>(result.manifolds[0].samples->size()));
  CHECK(saw_radial);
}

TEST_CASE("svg output colors samples by sign") {
  SUBCASE("attracting cycle draws only blue ticks") {
    AnalysisConfig cfg = quick_config("limit_cycle.json");
    AnalysisResult result = run_analysis(cfg, {}, true);
    std::ostringstream out;
    emit_svg(result, {}, out);
    std::string svg = out.str();
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("stroke=\"blue\"") != std::string::npos);
    CHECK(svg.find("stroke=\"red\"") == std::string::npos);
    CHECK(svg.find("polygon") != std::string::npos);  // closed curve
  }

  SUBCASE("saddle shows both signs") {
    AnalysisConfig cfg = quick_config("saddle.json");
    AnalysisResult result = run_analysis(cfg, {}, true);
    std::ostringstream out;
    emit_svg(result, {}, out);
    std::string svg = out.str();
    CHECK(svg.find("stroke=\"blue\"") != std::string::npos);
    CHECK(svg.find("stroke=\"red\"") != std::string::npos);
  }

  SUBCASE("zero field is entirely neutral gray") {
    AnalysisConfig cfg = config_from_json(ordered_json::parse(
        R"({"system_name": "zero", "field": {"fx": "0", "fy": "0"},
            "manifolds": [{"type": "graph", "g": "0", "domain": [-1, 1]}],
            "oracle": {"h": 0.01, "t": 0.5}})"));
    AnalysisResult result = run_analysis(cfg, {}, true);
    std::ostringstream out;
    emit_svg(result, {}, out);
    std::string svg = out.str();
    CHECK(svg.find("stroke=\"gray\"") != std::string::npos);
    CHECK(svg.find("stroke=\"blue\"") == std::string::npos);
    CHECK(svg.find("stroke=\"red\"") == std::string::npos);
  }
}

TEST_CASE("cli analyze") {
  SUBCASE("clean run writes the report and exits zero") {
    fs::path dir = fresh_dir("attract_cli_ok");
    int rc = run_cli(dir, "analyze " + fixture("focus_stable.json"));
    CHECK(rc == 0);
    REQUIRE(fs::exists(dir / "report.json"));
    ordered_json j = ordered_json::parse(slurp(dir / "report.json"));
    CHECK(j["manifolds"][0]["criterion"]["overall"] == "attractive");
    CHECK(j["manifolds"][0]["agreement"] == true);
    std::string stdout_text = slurp(dir / "cli_stdout.txt");
    CHECK(stdout_text.find("attractive") != std::string::npos);
  }

  SUBCASE("invariance failure exits 2 but still reports") {
    fs::path dir = fresh_dir("attract_cli_gate");
    int rc = run_cli(dir, "analyze " + fixture("non_invariant.json"));
    CHECK(rc == 2);
    REQUIRE(fs::exists(dir / "report.json"));
    ordered_json j = ordered_json::parse(slurp(dir / "report.json"));
    CHECK(j["manifolds"][0]["gated"] == true);
  }

  SUBCASE("force pushes past the gate") {
    fs::path dir = fresh_dir("attract_cli_force");
    int rc =
        run_cli(dir, "analyze --force " + fixture("non_invariant.json"));
    CHECK(rc == 0);
    ordered_json j = ordered_json::parse(slurp(dir / "report.json"));
    CHECK(j["manifolds"][0]["criterion"]["overall"] == "mixed");
  }

  SUBCASE("svg and samples flags write the side outputs") {
    fs::path dir = fresh_dir("attract_cli_outputs");
    int rc = run_cli(dir, "analyze --svg plot.svg --samples tube.csv " +
                              fixture("saddle.json"));
    CHECK(rc == 0);
    CHECK(fs::exists(dir / "plot.svg"));
    CHECK(fs::exists(dir / "tube.csv"));
    std::string svg = slurp(dir / "plot.svg");
    CHECK(svg.find("stroke=\"green\"") != std::string::npos);  // orbits drawn
  }

  SUBCASE("missing config exits 1") {
    fs::path dir = fresh_dir("attract_cli_missing");
    CHECK(run_cli(dir, "analyze no_such_file.json") == 1);
  }

  SUBCASE("malformed json exits 1 with a parse diagnostic") {
    fs::path dir = fresh_dir("attract_cli_badjson");
    std::ofstream(dir / "bad.json") << "{ not json";
    CHECK(run_cli(dir, "analyze bad.json") == 1);
    std::string err = slurp(dir / "cli_stderr.txt");
    CHECK(err.find("error") != std::string::npos);
  }

  SUBCASE("syntax error in a field component exits 1") {
    fs::path dir = fresh_dir("attract_cli_badexpr");
    std::ofstream(dir / "bad_expr.json") <<
        R"({"system_name": "s", "field": {"fx": "x +", "fy": "y"},
            "manifolds": [{"type": "equilibrium", "px": 0, "py": 0}]})";
    CHECK(run_cli(dir, "analyze bad_expr.json") == 1);
    std::string err = slurp(dir / "cli_stderr.txt");
    CHECK(err.find("offset 3") != std::string::npos);
  }
}

TEST_CASE("cli check-invariance") {
  fs::path dir = fresh_dir("attract_cli_check");
  CHECK(run_cli(dir, "check-invariance " + fixture("focus_stable.json")) ==
        0);
  CHECK(run_cli(dir, "check-invariance " + fixture("non_invariant.json")) ==
        2);
  std::string out = slurp(dir / "cli_stdout.txt");
  CHECK(out.find("FAIL") != std::string::npos);
  CHECK(out.find("max_residual") != std::string::npos);
}

TEST_CASE("cli orbit") {
  fs::path dir = fresh_dir("attract_cli_orbit");
  int rc = run_cli(dir, "orbit " + fixture("center.json") +
                            " --seed 1,0 --h 0.01 --T 0.5");
  CHECK(rc == 0);
  std::string out = slurp(dir / "cli_stdout.txt");
  CHECK(out.rfind("t,x,y,dist", 0) == 0);
  CHECK(std::count(out.begin(), out.end(), '\n') == 52);  // header + 51 rows

  SUBCASE("file output") {
    CHECK(run_cli(dir, "orbit " + fixture("center.json") +
                           " --seed 1,0 --h 0.01 --T 0.5 --out orbit.csv") ==
          0);
    REQUIRE(fs::exists(dir / "orbit.csv"));
    CHECK(slurp(dir / "orbit.csv").rfind("t,x,y,dist", 0) == 0);
  }

  SUBCASE("manifold index is validated") {
    CHECK(run_cli(dir, "orbit " + fixture("center.json") +
                           " --seed 1,0 --manifold 5") == 1);
  }
}
