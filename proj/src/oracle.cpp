#include "attract/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace attract {

const char* to_string(OracleResult r) {
  switch (r) {
    case OracleResult::Attractive: return "attractive";
    case OracleResult::Repulsive: return "repulsive";
    case OracleResult::Inconclusive: return "inconclusive";
  }
  return "?";
}

Vec2 rk4_step(const VectorField& field, Vec2 p, double h) {
  Vec2 k1 = field.eval(p);
  Vec2 k2 = field.eval(p + (0.5 * h) * k1);
  Vec2 k3 = field.eval(p + (0.5 * h) * k2);
  Vec2 k4 = field.eval(p + h * k3);
  return p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

OrbitTrace integrate_orbit(const VectorField& field, Vec2 seed, double h,
                           double T, const ManifoldGeometry& geom,
                           Rect window) {
  OrbitTrace trace;
  trace.seed = seed;
  long n_steps = static_cast<long>(std::ceil(T / h - 1e-12));
  trace.times.reserve(n_steps + 1);
  trace.points.reserve(n_steps + 1);
  trace.distances.reserve(n_steps + 1);

  Vec2 p = seed;
  double t = 0.0;
  trace.times.push_back(t);
  trace.points.push_back(p);
  trace.distances.push_back(geom.distance(p));

  for (long i = 0; i < n_steps; ++i) {
    double step = std::min(h, T - t);
    try {
      p = rk4_step(field, p, step);
    } catch (const DomainError& e) {
      trace.failed = true;
      trace.note = e.what();
      break;
    }
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      trace.failed = true;
      trace.note = "state became non-finite";
      break;
    }
    t += step;
    trace.times.push_back(t);
    trace.points.push_back(p);
    trace.distances.push_back(geom.distance(p));
    if (!window.contains(p)) {
      trace.escaped = true;
      trace.note = "left the window";
      break;
    }
  }
  return trace;
}

std::vector<Vec2> tube_seeds(const ManifoldGeometry& geom,
                             const TubeConfig& cfg, int max_seeds) {
  FrameSample fs = geom.frames(cfg.n_base);
  std::vector<Side> sides = sides_for(geom);

  // Side-major order so an even subsample keeps both sides represented.
  std::vector<Vec2> seeds;
  seeds.reserve(fs.frames.size() * sides.size());
  for (Side side : sides) {
    for (const Frame& frame : fs.frames) {
      Vec2 n_hat = frame.normal;
      switch (side) {
        case Side::Minus:
          n_hat = -frame.normal;
          break;
        case Side::Inward:
          n_hat = geom.counterclockwise() ? frame.normal : -frame.normal;
          break;
        case Side::Outward:
          n_hat = geom.counterclockwise() ? -frame.normal : frame.normal;
          break;
        default:
          break;
      }
      seeds.push_back(frame.base + cfg.eps_max * n_hat);
    }
  }

  if (static_cast<int>(seeds.size()) <= max_seeds) return seeds;
  std::vector<Vec2> picked;
  picked.reserve(max_seeds);
  std::size_t stride = (seeds.size() + max_seeds - 1) / max_seeds;
  for (std::size_t i = 0; i < seeds.size(); i += stride) picked.push_back(seeds[i]);
  return picked;
}

OracleVerdict oracle_verdict(const VectorField& field,
                             const ManifoldGeometry& geom,
                             const TubeConfig& cfg, double h, double T,
                             Rect window, const par::ExecPolicy& policy) {
  std::vector<Vec2> seeds = tube_seeds(geom, cfg);
  const long n = static_cast<long>(seeds.size());

  struct SeedOutcome {
    double ratio = 0.0;
    bool escaped = false;
    bool failed = false;
  };
  std::vector<SeedOutcome> outcomes(n);

  const int nt = par::resolve_threads(policy);
  (void)nt;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(nt) \
    if (policy.parallel && nt > 1)
#endif
  for (long i = 0; i < n; ++i) {
    OrbitTrace trace = integrate_orbit(field, seeds[i], h, T, geom, window);
    SeedOutcome& o = outcomes[i];
    o.escaped = trace.escaped;
    o.failed = trace.failed;
    double d0 = trace.distances.front();
    double dT = trace.distances.back();
    if (trace.failed || d0 <= 0.0 || !std::isfinite(dT)) {
      o.failed = true;
    } else {
      o.ratio = dT / d0;
    }
  }

  OracleVerdict v;
  v.seeds_used = static_cast<int>(n);
  std::vector<double> ratios;
  ratios.reserve(n);
  for (const SeedOutcome& o : outcomes) {
    if (o.failed) {
      ++v.failed;
      continue;
    }
    if (o.escaped) ++v.escaped;
    ratios.push_back(o.ratio);
  }

  if (!ratios.empty()) {
    std::sort(ratios.begin(), ratios.end());
    std::size_t m = ratios.size() / 2;
    v.contraction_ratio = ratios.size() % 2 == 1
                              ? ratios[m]
                              : 0.5 * (ratios[m - 1] + ratios[m]);
  } else {
    v.contraction_ratio = std::numeric_limits<double>::quiet_NaN();
  }

  if (v.failed * 2 > v.seeds_used) {
    v.verdict = OracleResult::Inconclusive;
  } else if (v.escaped * 2 > v.seeds_used || v.contraction_ratio > 10.0) {
    v.verdict = OracleResult::Repulsive;
  } else if (v.contraction_ratio < 0.1) {
    v.verdict = OracleResult::Attractive;
  } else {
    v.verdict = OracleResult::Inconclusive;
  }
  return v;
}

void write_orbit_csv(const OrbitTrace& trace, std::ostream& out,
                     int max_rows) {
  out << "t,x,y,dist\n";
  std::size_t n = trace.times.size();
  if (n == 0) return;
  std::size_t stride = (n + max_rows - 1) / max_rows;
  if (stride < 1) stride = 1;
  char line[160];
  for (std::size_t i = 0; i < n; i += stride) {
    std::snprintf(line, sizeof(line), "%.6g,%.6g,%.6g,%.6g\n", trace.times[i],
                  trace.points[i].x, trace.points[i].y, trace.distances[i]);
    out << line;
  }
  if ((n - 1) % stride != 0) {
    std::size_t i = n - 1;
    std::snprintf(line, sizeof(line), "%.6g,%.6g,%.6g,%.6g\n", trace.times[i],
                  trace.points[i].x, trace.points[i].y, trace.distances[i]);
    out << line;
  }
}

}  // namespace attract
