#include "attract/criterion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace attract {

EmptySide::EmptySide(const std::string& what) : std::runtime_error(what) {}
AllSamplesExcluded::AllSamplesExcluded(const std::string& what)
    : std::runtime_error(what) {}

const char* to_string(Side s) {
  switch (s) {
    case Side::Radial: return "radial";
    case Side::Plus: return "plus";
    case Side::Minus: return "minus";
    case Side::Inward: return "inward";
    case Side::Outward: return "outward";
  }
  return "?";
}

const char* to_string(SideVerdict v) {
  switch (v) {
    case SideVerdict::Attractive: return "attractive";
    case SideVerdict::Repulsive: return "repulsive";
    case SideVerdict::Neutral: return "neutral";
    case SideVerdict::Indefinite: return "indefinite";
  }
  return "?";
}

const char* to_string(OverallVerdict v) {
  switch (v) {
    case OverallVerdict::Attractive: return "attractive";
    case OverallVerdict::Repulsive: return "repulsive";
    case OverallVerdict::Neutral: return "neutral";
    case OverallVerdict::Indefinite: return "indefinite";
    case OverallVerdict::Mixed: return "mixed";
  }
  return "?";
}

double inner_product_at(const VectorField& field, Vec2 base, Vec2 n_hat,
                        double r) {
  Vec2 p = base + r * n_hat;
  return field.eval(p).dot(n_hat);
}

std::vector<Side> sides_for(const ManifoldGeometry& geom) {
  if (geom.is_point()) return {Side::Radial};
  if (geom.is_closed_curve()) return {Side::Inward, Side::Outward};
  return {Side::Plus, Side::Minus};
}

namespace {

Vec2 side_normal(const ManifoldGeometry& geom, const Frame& frame, Side side) {
  switch (side) {
    case Side::Radial:
      return frame.normal;
    case Side::Plus:
      return frame.normal;
    case Side::Minus:
      return -frame.normal;
    case Side::Inward:
      return geom.counterclockwise() ? frame.normal : -frame.normal;
    case Side::Outward:
      return geom.counterclockwise() ? -frame.normal : frame.normal;
  }
  return frame.normal;
}

TubeSample make_sample(const VectorField& field, const Frame& frame, Side side,
                       Vec2 n_hat, double offset) {
  TubeSample s;
  s.frame = frame;
  s.side = side;
  s.offset = offset;
  s.n_hat = n_hat;
  s.point = frame.base + offset * n_hat;
  try {
    s.f = field.eval(s.point);
    s.ip = s.f.dot(n_hat);
  } catch (const DomainError& e) {
    s.excluded = true;
    s.exclude_reason = e.what();
    s.ip = std::numeric_limits<double>::quiet_NaN();
  }
  return s;
}

}  // namespace

std::vector<TubeSample> sample_tube(const VectorField& field,
                                    const ManifoldGeometry& geom,
                                    const TubeConfig& cfg,
                                    const par::ExecPolicy& policy) {
  FrameSample fs = geom.frames(cfg.n_base);
  std::vector<Side> sides = sides_for(geom);
  const long n_frames = static_cast<long>(fs.frames.size());
  const long n_sides = static_cast<long>(sides.size());
  const long n_off = cfg.n_offsets;
  if (n_frames == 0) throw EmptySide("no frames could be placed");

  auto offset_at = [&cfg](long j) {
    if (cfg.n_offsets == 1) return cfg.eps_max;
    return cfg.eps_min +
           (cfg.eps_max - cfg.eps_min) * j / (cfg.n_offsets - 1);
  };

  std::vector<TubeSample> samples(
      static_cast<std::size_t>(n_frames * n_sides * n_off));

  const int nt = par::resolve_threads(policy);
  (void)nt;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nt) \
    if (policy.parallel && nt > 1)
#endif
  for (long fi = 0; fi < n_frames; ++fi) {
    const Frame& frame = fs.frames[fi];
    for (long si = 0; si < n_sides; ++si) {
      Vec2 n_hat = side_normal(geom, frame, sides[si]);
      for (long j = 0; j < n_off; ++j) {
        samples[(fi * n_sides + si) * n_off + j] =
            make_sample(field, frame, sides[si], n_hat, offset_at(j));
      }
    }
  }

  bool any_ok = std::any_of(samples.begin(), samples.end(),
                            [](const TubeSample& s) { return !s.excluded; });
  if (!any_ok)
    throw AllSamplesExcluded("field evaluation failed at every tube sample");
  return samples;
}

SideClassification classify_side(std::span<const TubeSample> samples,
                                 double zero_tol) {
  if (samples.empty()) throw EmptySide("side has no samples");
  SideClassification out;
  out.n_samples = static_cast<int>(samples.size());

  bool have = false;
  const TubeSample* lo = nullptr;
  const TubeSample* hi = nullptr;
  for (const TubeSample& s : samples) {
    if (s.excluded) {
      ++out.n_excluded;
      continue;
    }
    if (!have || s.ip < lo->ip) lo = &s;
    if (!have || s.ip > hi->ip) hi = &s;
    have = true;
  }

  if (!have) {
    out.verdict = SideVerdict::Indefinite;
    out.min_ip = std::numeric_limits<double>::quiet_NaN();
    out.max_ip = std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  out.min_ip = lo->ip;
  out.max_ip = hi->ip;
  if (out.min_ip < -zero_tol) out.witness_attract = *lo;
  if (out.max_ip > zero_tol) out.witness_repel = *hi;

  if (out.max_ip < -zero_tol) {
    out.verdict = SideVerdict::Attractive;
  } else if (out.min_ip > zero_tol) {
    out.verdict = SideVerdict::Repulsive;
  } else if (std::fabs(out.min_ip) <= zero_tol &&
             std::fabs(out.max_ip) <= zero_tol) {
    out.verdict = SideVerdict::Neutral;
  } else {
    out.verdict = SideVerdict::Indefinite;
  }

  // Too many holes in the tube means the verdict is not trustworthy.
  if (out.n_excluded * 10 > out.n_samples) {
    out.verdict = SideVerdict::Indefinite;
  }
  return out;
}

ManifoldClassification classify_samples(std::span<const TubeSample> samples,
                                        std::span<const Side> sides,
                                        double zero_tol) {
  ManifoldClassification out;
  for (Side side : sides) {
    std::vector<TubeSample> side_samples;
    side_samples.reserve(samples.size() / sides.size());
    for (const TubeSample& s : samples) {
      if (s.side == side) side_samples.push_back(s);
    }
    out.per_side.emplace_back(side, classify_side(side_samples, zero_tol));
  }

  bool any_indefinite = false;
  bool all_same = true;
  SideVerdict first = out.per_side.front().second.verdict;
  for (const auto& [side, sc] : out.per_side) {
    if (sc.verdict == SideVerdict::Indefinite) any_indefinite = true;
    if (sc.verdict != first) all_same = false;
  }

  if (any_indefinite) {
    out.overall = OverallVerdict::Indefinite;
  } else if (!all_same) {
    out.overall = OverallVerdict::Mixed;
  } else {
    switch (first) {
      case SideVerdict::Attractive:
        out.overall = OverallVerdict::Attractive;
        break;
      case SideVerdict::Repulsive:
        out.overall = OverallVerdict::Repulsive;
        break;
      case SideVerdict::Neutral:
        out.overall = OverallVerdict::Neutral;
        break;
      case SideVerdict::Indefinite:
        out.overall = OverallVerdict::Indefinite;
        break;
    }
  }
  return out;
}

ManifoldClassification classify_manifold(const VectorField& field,
                                         const ManifoldGeometry& geom,
                                         const TubeConfig& cfg,
                                         const par::ExecPolicy& policy) {
  FrameSample fs = geom.frames(cfg.n_base);
  std::vector<TubeSample> samples = sample_tube(field, geom, cfg, policy);
  std::vector<Side> sides = sides_for(geom);
  ManifoldClassification out =
      classify_samples(samples, sides, cfg.zero_tol);
  out.singular_skipped = fs.singular_skipped;
  return out;
}

}  // namespace attract
