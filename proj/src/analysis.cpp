#include "attract/analysis.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace attract {

ConfigError::ConfigError(std::string path_in, const std::string& what)
    : std::runtime_error("config error at '" + path_in + "': " + what),
      path(std::move(path_in)) {}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

const ordered_json& require(const ordered_json& j, const char* key,
                            const std::string& path) {
  auto it = j.find(key);
  if (it == j.end())
    throw ConfigError(path.empty() ? key : path + "." + key,
                      "missing required field");
  return *it;
}

double as_double(const ordered_json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

int as_int(const ordered_json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<int>();
}

std::string as_string(const ordered_json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

bool as_bool(const ordered_json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected a boolean");
  return j.get<bool>();
}

std::pair<double, double> as_range(const ordered_json& j,
                                   const std::string& path) {
  if (!j.is_array() || j.size() != 2)
    throw ConfigError(path, "expected [lo, hi]");
  double lo = as_double(j[0], path + "[0]");
  double hi = as_double(j[1], path + "[1]");
  if (!(lo < hi)) throw ConfigError(path, "requires lo < hi");
  return {lo, hi};
}

Rect as_window(const ordered_json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected {\"x\":[..],\"y\":[..]}");
  auto [xlo, xhi] = as_range(require(j, "x", path), path + ".x");
  auto [ylo, yhi] = as_range(require(j, "y", path), path + ".y");
  return {xlo, xhi, ylo, yhi};
}

Expr parse_or_config_error(const std::string& src, VarSet vars,
                           const std::string& path) {
  try {
    return parse_expression(src, vars);
  } catch (const SyntaxError& e) {
    throw ConfigError(path, e.what());
  } catch (const UnknownIdentifier& e) {
    throw ConfigError(path, e.what());
  }
}

ordered_json window_to_json(Rect w) {
  return ordered_json{{"x", {w.xlo, w.xhi}}, {"y", {w.ylo, w.yhi}}};
}

ManifoldEntry parse_manifold(const ordered_json& j, std::size_t idx) {
  std::string path = "manifolds[" + std::to_string(idx) + "]";
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  std::string type = as_string(require(j, "type", path), path + ".type");

  ManifoldEntry entry;
  entry.label = j.contains("label")
                    ? as_string(j["label"], path + ".label")
                    : "m" + std::to_string(idx);

  ordered_json raw;
  raw["type"] = type;
  raw["label"] = entry.label;

  if (type == "equilibrium") {
    double px = as_double(require(j, "px", path), path + ".px");
    double py = as_double(require(j, "py", path), path + ".py");
    entry.spec = EquilibriumSpec{{px, py}};
    raw["px"] = px;
    raw["py"] = py;
  } else if (type == "graph") {
    bool has_g = j.contains("g");
    bool has_h = j.contains("h");
    if (has_g == has_h)
      throw ConfigError(path, "graph needs exactly one of \"g\" or \"h\"");
    auto [lo, hi] = as_range(require(j, "domain", path), path + ".domain");
    GraphSpec spec;
    spec.lo = lo;
    spec.hi = hi;
    if (has_g) {
      std::string src = as_string(j["g"], path + ".g");
      spec.axis = GraphSpec::Axis::YofX;
      spec.fn = parse_or_config_error(src, VarSet::only_x(), path + ".g");
      raw["g"] = src;
    } else {
      std::string src = as_string(j["h"], path + ".h");
      spec.axis = GraphSpec::Axis::XofY;
      spec.fn = parse_or_config_error(src, VarSet::only_y(), path + ".h");
      raw["h"] = src;
    }
    raw["domain"] = {lo, hi};
    entry.spec = spec;
  } else if (type == "implicit") {
    std::string src = as_string(require(j, "f", path), path + ".f");
    ImplicitSpec spec;
    spec.f = parse_or_config_error(src, VarSet::xy(), path + ".f");
    spec.window = as_window(require(j, "window", path), path + ".window");
    raw["f"] = src;
    raw["window"] = window_to_json(spec.window);
    entry.spec = spec;
  } else if (type == "parametric") {
    std::string cx = as_string(require(j, "cx", path), path + ".cx");
    std::string cy = as_string(require(j, "cy", path), path + ".cy");
    auto [t0, t1] = as_range(require(j, "t_range", path), path + ".t_range");
    ParametricSpec spec;
    spec.cx = parse_or_config_error(cx, VarSet::only_t(), path + ".cx");
    spec.cy = parse_or_config_error(cy, VarSet::only_t(), path + ".cy");
    spec.t0 = t0;
    spec.t1 = t1;
    spec.closed = j.contains("closed")
                      ? as_bool(j["closed"], path + ".closed")
                      : false;
    raw["cx"] = cx;
    raw["cy"] = cy;
    raw["t_range"] = {t0, t1};
    raw["closed"] = spec.closed;
    entry.spec = spec;
  } else {
    throw ConfigError(path + ".type",
                      "expected equilibrium, graph, implicit or parametric");
  }
  entry.raw = std::move(raw);
  return entry;
}

}  // namespace

AnalysisConfig config_from_json(const ordered_json& j) {
  if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
  AnalysisConfig cfg;
  cfg.system_name = as_string(require(j, "system_name", ""), "system_name");

  const ordered_json& field = require(j, "field", "");
  cfg.fx_src = as_string(require(field, "fx", "field"), "field.fx");
  cfg.fy_src = as_string(require(field, "fy", "field"), "field.fy");
  cfg.field.fx = parse_or_config_error(cfg.fx_src, VarSet::xy(), "field.fx");
  cfg.field.fy = parse_or_config_error(cfg.fy_src, VarSet::xy(), "field.fy");

  const ordered_json& manifolds = require(j, "manifolds", "");
  if (!manifolds.is_array() || manifolds.empty())
    throw ConfigError("manifolds", "expected a non-empty array");
  for (std::size_t i = 0; i < manifolds.size(); ++i) {
    cfg.manifolds.push_back(parse_manifold(manifolds[i], i));
  }

  if (j.contains("tube")) {
    const ordered_json& tube = j["tube"];
    if (!tube.is_object()) throw ConfigError("tube", "expected an object");
    if (tube.contains("eps_min"))
      cfg.tube.eps_min = as_double(tube["eps_min"], "tube.eps_min");
    if (tube.contains("eps_max"))
      cfg.tube.eps_max = as_double(tube["eps_max"], "tube.eps_max");
    if (tube.contains("n_offsets"))
      cfg.tube.n_offsets = as_int(tube["n_offsets"], "tube.n_offsets");
    if (tube.contains("n_base"))
      cfg.tube.n_base = as_int(tube["n_base"], "tube.n_base");
    if (tube.contains("zero_tol"))
      cfg.tube.zero_tol = as_double(tube["zero_tol"], "tube.zero_tol");
  }
  if (!(cfg.tube.eps_min > 0.0))
    throw ConfigError("tube.eps_min", "must be > 0");
  if (!(cfg.tube.eps_max > cfg.tube.eps_min))
    throw ConfigError("tube.eps_max", "must be > eps_min");
  if (cfg.tube.n_offsets < 1)
    throw ConfigError("tube.n_offsets", "must be >= 1");
  if (cfg.tube.n_base < 1) throw ConfigError("tube.n_base", "must be >= 1");
  if (cfg.tube.zero_tol < 0.0)
    throw ConfigError("tube.zero_tol", "must be >= 0");

  if (j.contains("oracle")) {
    const ordered_json& oracle = j["oracle"];
    if (!oracle.is_object()) throw ConfigError("oracle", "expected an object");
    if (oracle.contains("h"))
      cfg.oracle.h = as_double(oracle["h"], "oracle.h");
    if (oracle.contains("t"))
      cfg.oracle.T = as_double(oracle["t"], "oracle.t");
    if (oracle.contains("window"))
      cfg.oracle.window = as_window(oracle["window"], "oracle.window");
  }
  if (!(cfg.oracle.h > 0.0)) throw ConfigError("oracle.h", "must be > 0");
  if (!(cfg.oracle.T > 0.0)) throw ConfigError("oracle.t", "must be > 0");

  if (j.contains("outputs")) {
    const ordered_json& outputs = j["outputs"];
    if (!outputs.is_object())
      throw ConfigError("outputs", "expected an object");
    if (outputs.contains("report"))
      cfg.outputs.report = as_string(outputs["report"], "outputs.report");
    if (outputs.contains("samples"))
      cfg.outputs.samples = as_string(outputs["samples"], "outputs.samples");
    if (outputs.contains("svg"))
      cfg.outputs.svg = as_string(outputs["svg"], "outputs.svg");
  }

  if (j.contains("force")) cfg.force = as_bool(j["force"], "force");
  return cfg;
}

AnalysisConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path, e.what());
  }
  return config_from_json(j);
}

ordered_json config_to_json(const AnalysisConfig& cfg) {
  ordered_json j;
  j["system_name"] = cfg.system_name;
  j["field"] = {{"fx", cfg.fx_src}, {"fy", cfg.fy_src}};
  ordered_json manifolds = ordered_json::array();
  for (const ManifoldEntry& m : cfg.manifolds) manifolds.push_back(m.raw);
  j["manifolds"] = std::move(manifolds);
  j["tube"] = {{"eps_min", cfg.tube.eps_min},
               {"eps_max", cfg.tube.eps_max},
               {"n_offsets", cfg.tube.n_offsets},
               {"n_base", cfg.tube.n_base},
               {"zero_tol", cfg.tube.zero_tol}};
  ordered_json oracle;
  oracle["h"] = cfg.oracle.h;
  oracle["t"] = cfg.oracle.T;
  if (cfg.oracle.window) oracle["window"] = window_to_json(*cfg.oracle.window);
  j["oracle"] = std::move(oracle);
  ordered_json outputs;
  outputs["report"] = cfg.outputs.report;
  if (cfg.outputs.samples) outputs["samples"] = *cfg.outputs.samples;
  if (cfg.outputs.svg) outputs["svg"] = *cfg.outputs.svg;
  j["outputs"] = std::move(outputs);
  j["force"] = cfg.force;
  return j;
}

bool verdicts_consistent(OverallVerdict criterion, OracleResult oracle) {
  switch (criterion) {
    case OverallVerdict::Attractive:
      return oracle == OracleResult::Attractive;
    case OverallVerdict::Repulsive:
      return oracle == OracleResult::Repulsive;
    case OverallVerdict::Neutral:
      return oracle == OracleResult::Inconclusive;
    case OverallVerdict::Indefinite:
      return oracle == OracleResult::Inconclusive ||
             oracle == OracleResult::Repulsive;
    case OverallVerdict::Mixed:
      return oracle == OracleResult::Inconclusive;
  }
  return false;
}

AnalysisResult run_analysis(const AnalysisConfig& cfg,
                            const par::ExecPolicy& policy, bool keep_samples) {
  constexpr int kInvariancePoints = 256;
  constexpr double kInvarianceTol = 1e-8;

  AnalysisResult result;
  result.config = cfg;
  auto total_start = Clock::now();

  for (const ManifoldEntry& entry : cfg.manifolds) {
    ManifoldResult mr;
    mr.label = entry.label;
    ManifoldGeometry geom(entry.spec);

    auto t0 = Clock::now();
    mr.invariance = invariance_residual(cfg.field, geom, kInvariancePoints,
                                        kInvarianceTol, policy);
    result.invariance_ms += ms_since(t0);

    if (!mr.invariance.pass && !cfg.force) {
      mr.gated = true;
      result.exit_code = 2;
      result.manifolds.push_back(std::move(mr));
      continue;
    }

    auto t1 = Clock::now();
    FrameSample fs = geom.frames(cfg.tube.n_base);
    std::vector<TubeSample> samples =
        sample_tube(cfg.field, geom, cfg.tube, policy);
    std::vector<Side> sides = sides_for(geom);
    ManifoldClassification cls =
        classify_samples(samples, sides, cfg.tube.zero_tol);
    cls.singular_skipped = fs.singular_skipped;
    mr.classification = std::move(cls);
    if (keep_samples) mr.samples = samples;
    result.criterion_ms += ms_since(t1);

    auto t2 = Clock::now();
    Rect window = cfg.oracle.window.value_or(geom.default_window());
    mr.oracle_window = window;
    mr.oracle = oracle_verdict(cfg.field, geom, cfg.tube, cfg.oracle.h,
                               cfg.oracle.T, window, policy);
    result.oracle_ms += ms_since(t2);

    mr.agreement =
        verdicts_consistent(mr.classification->overall, mr.oracle->verdict);
    result.manifolds.push_back(std::move(mr));
  }

  result.total_ms = ms_since(total_start);
  return result;
}

namespace {

ordered_json finite_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json sample_to_json(const TubeSample& s) {
  ordered_json j;
  j["side"] = to_string(s.side);
  j["arc_param"] = s.frame.arc_param;
  j["offset"] = s.offset;
  j["base"] = {s.frame.base.x, s.frame.base.y};
  j["normal"] = {s.n_hat.x, s.n_hat.y};
  j["point"] = {s.point.x, s.point.y};
  j["f"] = {s.f.x, s.f.y};
  j["ip"] = finite_or_null(s.ip);
  return j;
}

ordered_json side_to_json(const SideClassification& sc) {
  ordered_json j;
  j["verdict"] = to_string(sc.verdict);
  j["min_ip"] = finite_or_null(sc.min_ip);
  j["max_ip"] = finite_or_null(sc.max_ip);
  j["n_samples"] = sc.n_samples;
  j["n_excluded"] = sc.n_excluded;
  j["witness_attract"] =
      sc.witness_attract ? sample_to_json(*sc.witness_attract)
                         : ordered_json(nullptr);
  j["witness_repel"] = sc.witness_repel ? sample_to_json(*sc.witness_repel)
                                        : ordered_json(nullptr);
  return j;
}

}  // namespace

ordered_json report_to_json(const AnalysisResult& result) {
  ordered_json j;
  j["tool"] = "attract";
  j["tool_version"] = kToolVersion;
  j["system_name"] = result.config.system_name;
  j["config"] = config_to_json(result.config);
  j["notes"] = ordered_json::array(
      {"verdicts describe the sampled tube [eps_min, eps_max] around each "
       "manifold, not a basin of attraction"});

  ordered_json manifolds = ordered_json::array();
  for (const ManifoldResult& mr : result.manifolds) {
    ordered_json m;
    m["label"] = mr.label;
    m["invariance"] = {{"max_residual", finite_or_null(mr.invariance.max_residual)},
                       {"mean_residual", finite_or_null(mr.invariance.mean_residual)},
                       {"n_points", mr.invariance.n_points},
                       {"singular_skipped", mr.invariance.singular_skipped},
                       {"tol", mr.invariance.tol},
                       {"pass", mr.invariance.pass}};
    m["gated"] = mr.gated;

    if (mr.classification) {
      ordered_json crit;
      ordered_json per_side;
      for (const auto& [side, sc] : mr.classification->per_side) {
        per_side[to_string(side)] = side_to_json(sc);
      }
      crit["per_side"] = std::move(per_side);
      crit["overall"] = to_string(mr.classification->overall);
      crit["singular_skipped"] = mr.classification->singular_skipped;
      m["criterion"] = std::move(crit);
    } else {
      m["criterion"] = nullptr;
    }

    if (mr.oracle) {
      m["oracle"] = {{"verdict", to_string(mr.oracle->verdict)},
                     {"contraction_ratio",
                      finite_or_null(mr.oracle->contraction_ratio)},
                     {"seeds_used", mr.oracle->seeds_used},
                     {"escaped", mr.oracle->escaped},
                     {"failed", mr.oracle->failed},
                     {"h", result.config.oracle.h},
                     {"t", result.config.oracle.T},
                     {"window", window_to_json(mr.oracle_window)}};
    } else {
      m["oracle"] = nullptr;
    }

    m["agreement"] =
        mr.agreement ? ordered_json(*mr.agreement) : ordered_json(nullptr);
    manifolds.push_back(std::move(m));
  }
  j["manifolds"] = std::move(manifolds);

  j["timings"] = {{"invariance_ms", result.invariance_ms},
                  {"criterion_ms", result.criterion_ms},
                  {"oracle_ms", result.oracle_ms},
                  {"total_ms", result.total_ms}};
  return j;
}

void write_samples_csv(const AnalysisResult& result, std::ostream& out) {
  out << "manifold,side,arc_param,offset,base_x,base_y,normal_x,normal_y,"
         "sample_x,sample_y,fx,fy,ip,excluded,reason\n";
  char line[512];
  for (const ManifoldResult& mr : result.manifolds) {
    if (!mr.samples) continue;
    for (const TubeSample& s : *mr.samples) {
      std::string reason = s.excluded ? s.exclude_reason : "";
      for (char& c : reason) {
        if (c == ',') c = ';';
      }
      std::snprintf(line, sizeof(line),
                    "%s,%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,"
                    "%.9g,%d,%s\n",
                    mr.label.c_str(), to_string(s.side), s.frame.arc_param,
                    s.offset, s.frame.base.x, s.frame.base.y, s.n_hat.x,
                    s.n_hat.y, s.point.x, s.point.y, s.f.x, s.f.y, s.ip,
                    s.excluded ? 1 : 0, reason.c_str());
      out << line;
    }
  }
}

}  // namespace attract
