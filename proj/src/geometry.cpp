#include "attract/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace attract {

namespace {

constexpr int kImplicitGrid = 256;      // marching-squares resolution
constexpr int kPolylinePoints = 2049;   // >= 1024 segments for graph/parametric
constexpr int kMinImplicitSegments = 1024;
constexpr double kOnCurveTol = 1e-13;   // Newton refinement target for |F|
constexpr double kClosureTol = 1e-9;

double curve_param_span(const ManifoldGeometry::Chain& c) {
  return c.params.back() - c.params.front();
}

// Golden-section minimization of f over [a, b].
template <typename F>
double golden_min(F&& f, double a, double b, int iters) {
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 < f2 ? x1 : x2;
}

}  // namespace

InvalidManifold::InvalidManifold(const std::string& what)
    : std::runtime_error(what) {}
EmptyManifold::EmptyManifold(const std::string& what)
    : std::runtime_error(what) {}

// ---------------------------------------------------------------------------
// Curve evaluation helpers per spec shape

namespace {

Vec2 graph_point(const GraphSpec& g, double u) {
  if (g.axis == GraphSpec::Axis::YofX) return {u, g.fn.eval(u, 0.0)};
  return {g.fn.eval(0.0, u), u};
}

// Unit tangent of a graph at parameter u, oriented with increasing u.
Vec2 graph_tangent(const GraphSpec& g, double u) {
  if (g.axis == GraphSpec::Axis::YofX) {
    double d = g.fn.eval_dual(u, 0.0).dx;
    return Vec2{1.0, d}.normalized();
  }
  double d = g.fn.eval_dual(0.0, u).dy;
  return Vec2{d, 1.0}.normalized();
}

Vec2 parametric_point(const ParametricSpec& p, double t) {
  return {p.cx.eval_t(t), p.cy.eval_t(t)};
}

Vec2 parametric_velocity(const ParametricSpec& p, double t) {
  return {p.cx.eval_dual_param(t).dt, p.cy.eval_dual_param(t).dt};
}

Vec2 implicit_gradient(const ImplicitSpec& s, Vec2 p) {
  DualValue d = s.f.eval_dual(p.x, p.y);
  return {d.dx, d.dy};
}

// Newton projection of p onto the zero set of F along the gradient. Returns
// false when the gradient degenerates before |F| reaches the target.
bool newton_project(const ImplicitSpec& s, Vec2& p, double tol) {
  for (int i = 0; i < 24; ++i) {
    double f = s.f.eval(p.x, p.y);
    if (std::fabs(f) <= tol) return true;
    Vec2 g = implicit_gradient(s, p);
    double g2 = g.norm_sq();
    if (g2 < 1e-24) return false;
    p = p - (f / g2) * g;
  }
  return std::fabs(s.f.eval(p.x, p.y)) <= tol * 100.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// ManifoldGeometry

ManifoldGeometry::ManifoldGeometry(const ManifoldSpec& spec) : spec_(spec) {
  if (const auto* eq = std::get_if<EquilibriumSpec>(&spec_)) {
    bbox_ = {eq->point.x, eq->point.x, eq->point.y, eq->point.y};
    return;
  }
  if (const auto* g = std::get_if<GraphSpec>(&spec_)) {
    if (!(g->lo < g->hi))
      throw InvalidManifold("graph domain is empty or reversed");
    build_graph_chain();
  } else if (const auto* p = std::get_if<ParametricSpec>(&spec_)) {
    if (!(p->t0 < p->t1))
      throw InvalidManifold("parametric t range is empty or reversed");
    if (p->closed) {
      double gap = attract::distance(parametric_point(*p, p->t0),
                            parametric_point(*p, p->t1));
      if (gap > kClosureTol)
        throw InvalidManifold(
            "closed parametric curve endpoints do not coincide");
    }
    build_parametric_chain();
  } else if (const auto* s = std::get_if<ImplicitSpec>(&spec_)) {
    if (!(s->window.xlo < s->window.xhi) || !(s->window.ylo < s->window.yhi))
      throw InvalidManifold("implicit window is empty");
    build_implicit_chains();
    if (chains_.empty())
      throw EmptyManifold("implicit curve has no zero set in the window");
  }

  bbox_ = {std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity()};
  for (const Chain& c : chains_) {
    for (Vec2 q : c.points) bbox_ = bbox_.include(q);
  }

  if (const auto* p = std::get_if<ParametricSpec>(&spec_);
      p != nullptr && p->closed) {
    const Chain& c = chains_.front();
    double area2 = 0.0;
    for (std::size_t i = 0; i + 1 < c.points.size(); ++i) {
      area2 += c.points[i].x * c.points[i + 1].y -
               c.points[i + 1].x * c.points[i].y;
    }
    area2 += c.points.back().x * c.points.front().y -
             c.points.front().x * c.points.back().y;
    ccw_ = area2 > 0.0;
  }
}

bool ManifoldGeometry::is_point() const {
  return std::holds_alternative<EquilibriumSpec>(spec_);
}

bool ManifoldGeometry::is_closed_curve() const {
  if (const auto* p = std::get_if<ParametricSpec>(&spec_)) return p->closed;
  return false;
}

void ManifoldGeometry::build_graph_chain() {
  const auto& g = std::get<GraphSpec>(spec_);
  Chain c;
  c.points.reserve(kPolylinePoints);
  c.params.reserve(kPolylinePoints);
  for (int i = 0; i < kPolylinePoints; ++i) {
    double u = g.lo + (g.hi - g.lo) * i / (kPolylinePoints - 1);
    c.points.push_back(graph_point(g, u));
    c.params.push_back(u);
  }
  chains_.push_back(std::move(c));
}

void ManifoldGeometry::build_parametric_chain() {
  const auto& p = std::get<ParametricSpec>(spec_);
  Chain c;
  c.closed = p.closed;
  int n = p.closed ? kPolylinePoints - 1 : kPolylinePoints;
  c.points.reserve(n);
  c.params.reserve(n);
  for (int i = 0; i < n; ++i) {
    double denom = p.closed ? n : n - 1;
    double t = p.t0 + (p.t1 - p.t0) * i / denom;
    c.points.push_back(parametric_point(p, t));
    c.params.push_back(t);
  }
  chains_.push_back(std::move(c));
}

// Marching squares on a fixed grid, exact stitching through shared cell-edge
// keys, then arc-length resampling with Newton refinement so every stored
// point sits on the curve to near machine precision.
void ManifoldGeometry::build_implicit_chains() {
  const auto& s = std::get<ImplicitSpec>(spec_);
  const int n = kImplicitGrid;
  const double dx = s.window.width() / n;
  const double dy = s.window.height() / n;

  auto node_x = [&](int i) { return s.window.xlo + dx * i; };
  auto node_y = [&](int j) { return s.window.ylo + dy * j; };

  std::vector<double> value(static_cast<std::size_t>(n + 1) * (n + 1));
  auto val = [&](int i, int j) -> double& {
    return value[static_cast<std::size_t>(j) * (n + 1) + i];
  };
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      try {
        val(i, j) = s.f.eval(node_x(i), node_y(j));
      } catch (const DomainError&) {
        val(i, j) = std::numeric_limits<double>::quiet_NaN();
      }
    }
  }

  // Edge keys: (horizontal ? 0 : 1, i, j) identifies the grid edge a crossing
  // point lies on, so segments from neighboring cells stitch exactly.
  struct EdgeKey {
    int horiz, i, j;
    bool operator<(const EdgeKey& o) const {
      if (horiz != o.horiz) return horiz < o.horiz;
      if (i != o.i) return i < o.i;
      return j < o.j;
    }
  };

  auto interp = [](double x0, double y0, double x1, double y1, double f0,
                   double f1) -> Vec2 {
    double tau = f0 / (f0 - f1);
    return {x0 + tau * (x1 - x0), y0 + tau * (y1 - y0)};
  };

  std::map<EdgeKey, Vec2> edge_point;
  std::vector<std::pair<EdgeKey, EdgeKey>> segments;

  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      double f00 = val(i, j), f10 = val(i + 1, j);
      double f01 = val(i, j + 1), f11 = val(i + 1, j + 1);
      if (std::isnan(f00) || std::isnan(f10) || std::isnan(f01) ||
          std::isnan(f11))
        continue;
      auto neg = [](double f) { return f < 0.0; };
      int code = (neg(f00) ? 1 : 0) | (neg(f10) ? 2 : 0) | (neg(f11) ? 4 : 0) |
                 (neg(f01) ? 8 : 0);
      if (code == 0 || code == 15) continue;

      EdgeKey bottom{0, i, j}, top{0, i, j + 1}, left{1, i, j},
          right{1, i + 1, j};
      auto put = [&](EdgeKey k, Vec2 pnt) { edge_point.emplace(k, pnt); };
      double x0 = node_x(i), x1 = node_x(i + 1);
      double y0 = node_y(j), y1 = node_y(j + 1);
      if (neg(f00) != neg(f10)) put(bottom, interp(x0, y0, x1, y0, f00, f10));
      if (neg(f01) != neg(f11)) put(top, interp(x0, y1, x1, y1, f01, f11));
      if (neg(f00) != neg(f01)) put(left, interp(x0, y0, x0, y1, f00, f01));
      if (neg(f10) != neg(f11)) put(right, interp(x1, y0, x1, y1, f10, f11));

      auto add = [&](EdgeKey a, EdgeKey b) { segments.emplace_back(a, b); };
      switch (code) {
        case 1: case 14: add(left, bottom); break;
        case 2: case 13: add(bottom, right); break;
        case 3: case 12: add(left, right); break;
        case 4: case 11: add(right, top); break;
        case 6: case 9:  add(bottom, top); break;
        case 7: case 8:  add(left, top); break;
        case 5: case 10: {
          // Saddle cell: disambiguate with the center sample.
          double fc;
          try {
            fc = s.f.eval(0.5 * (x0 + x1), 0.5 * (y0 + y1));
          } catch (const DomainError&) {
            fc = 0.0;
          }
          bool center_neg = fc < 0.0;
          bool corners_neg = code == 5;  // f00 and f11 negative
          if (center_neg == corners_neg) {
            add(left, top);
            add(bottom, right);
          } else {
            add(left, bottom);
            add(right, top);
          }
          break;
        }
        default: break;
      }
    }
  }

  if (segments.empty()) return;

  // Walk the segment adjacency into chains: open paths from degree-1 points
  // first, remaining cycles afterwards.
  std::map<EdgeKey, std::vector<std::size_t>> at;
  for (std::size_t si = 0; si < segments.size(); ++si) {
    at[segments[si].first].push_back(si);
    at[segments[si].second].push_back(si);
  }
  std::vector<bool> used(segments.size(), false);

  auto walk = [&](EdgeKey start) {
    std::vector<Vec2> pts;
    pts.push_back(edge_point.at(start));
    EdgeKey cur = start;
    bool closed = false;
    while (true) {
      std::size_t next_seg = segments.size();
      for (std::size_t si : at[cur]) {
        if (!used[si]) {
          next_seg = si;
          break;
        }
      }
      if (next_seg == segments.size()) break;
      used[next_seg] = true;
      const auto& sgm = segments[next_seg];
      bool first_is_cur = !(sgm.first < cur) && !(cur < sgm.first);
      EdgeKey nxt = first_is_cur ? sgm.second : sgm.first;
      if (!(nxt < start) && !(start < nxt)) {
        closed = true;
        break;
      }
      pts.push_back(edge_point.at(nxt));
      cur = nxt;
    }
    return std::make_pair(pts, closed);
  };

  std::vector<std::pair<std::vector<Vec2>, bool>> raw_chains;
  for (const auto& [key, segs] : at) {
    if (segs.size() == 1 && !used[segs[0]]) {
      raw_chains.push_back(walk(key));
    }
  }
  for (std::size_t si = 0; si < segments.size(); ++si) {
    if (!used[si]) {
      raw_chains.push_back(walk(segments[si].first));
    }
  }

  // Resample each raw chain by arc length to at least its share of
  // kMinImplicitSegments, refining every kept point onto the curve.
  double total_len = 0.0;
  std::vector<double> lens;
  for (const auto& [pts, closed] : raw_chains) {
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      len += attract::distance(pts[i], pts[i + 1]);
    if (closed && pts.size() > 2) len += attract::distance(pts.back(), pts.front());
    lens.push_back(len);
    total_len += len;
  }
  if (total_len <= 0.0) return;

  for (std::size_t ci = 0; ci < raw_chains.size(); ++ci) {
    const auto& [pts, closed] = raw_chains[ci];
    if (pts.size() < 2) continue;
    int want = static_cast<int>(
        std::ceil(kMinImplicitSegments * lens[ci] / total_len));
    want = std::max<int>(want, static_cast<int>(pts.size()));
    int n_pts = closed ? want : want + 1;

    std::vector<double> cum(pts.size() + (closed ? 1 : 0), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i)
      cum[i] = cum[i - 1] + attract::distance(pts[i - 1], pts[i]);
    if (closed) cum[pts.size()] = cum[pts.size() - 1] +
                                  attract::distance(pts.back(), pts.front());
    double len = cum.back();

    Chain chain;
    chain.closed = closed;
    chain.points.reserve(n_pts);
    chain.params.reserve(n_pts);
    for (int k = 0; k < n_pts; ++k) {
      double target = closed ? len * k / want : len * k / (n_pts - 1);
      auto it = std::upper_bound(cum.begin(), cum.end(), target);
      std::size_t seg = std::min<std::size_t>(
          cum.size() - 2, static_cast<std::size_t>(
                              std::max<std::ptrdiff_t>(0, it - cum.begin() - 1)));
      double seg_len = cum[seg + 1] - cum[seg];
      double tau = seg_len > 0.0 ? (target - cum[seg]) / seg_len : 0.0;
      Vec2 a = pts[seg];
      Vec2 b = pts[(seg + 1) % pts.size()];
      Vec2 q = a + tau * (b - a);
      newton_project(s, q, kOnCurveTol);
      chain.points.push_back(q);
      chain.params.push_back(target);
    }
    chains_.push_back(std::move(chain));
  }
}

Rect ManifoldGeometry::default_window() const {
  Vec2 c = bbox_.center();
  double half = 4.0 * std::max({0.5 * bbox_.width(), 0.5 * bbox_.height(), 1.0});
  return {c.x - half, c.x + half, c.y - half, c.y + half};
}

// ---------------------------------------------------------------------------
// Distance

double ManifoldGeometry::refine_distance_on_curve(Vec2 p,
                                                  std::size_t chain_idx,
                                                  std::size_t seg_idx) const {
  const Chain& c = chains_[chain_idx];

  if (const auto* g = std::get_if<GraphSpec>(&spec_)) {
    std::size_t lo_i = seg_idx > 0 ? seg_idx - 1 : 0;
    std::size_t hi_i = std::min(seg_idx + 2, c.params.size() - 1);
    auto d2 = [&](double u) { return (p - graph_point(*g, u)).norm_sq(); };
    double u = golden_min(d2, c.params[lo_i], c.params[hi_i], 70);
    return (p - graph_point(*g, u)).norm();
  }

  if (const auto* pr = std::get_if<ParametricSpec>(&spec_)) {
    double span = pr->t1 - pr->t0;
    double step = curve_param_span(c) / (c.params.size() - 1);
    double lo = c.params[seg_idx] - step;
    double hi = c.params[seg_idx] + 2.0 * step;
    auto wrap = [&](double t) {
      if (!pr->closed) return std::clamp(t, pr->t0, pr->t1);
      while (t < pr->t0) t += span;
      while (t > pr->t1) t -= span;
      return t;
    };
    auto d2 = [&](double t) {
      return (p - parametric_point(*pr, wrap(t))).norm_sq();
    };
    double t = golden_min(d2, lo, hi, 70);
    return (p - parametric_point(*pr, wrap(t))).norm();
  }

  if (const auto* s = std::get_if<ImplicitSpec>(&spec_)) {
    // Sweep a short arc around the nearest vertex: walk along the tangent
    // line and reproject every candidate onto the zero set, minimizing the
    // distance over the walk parameter. Every candidate sits on the curve,
    // so the smallest distance seen is an honest upper bound that the
    // golden-section search drives down to the true foot point.
    Vec2 z0 = c.points[seg_idx];
    Vec2 b = c.points[(seg_idx + 1) % c.points.size()];
    if ((p - b).norm_sq() < (p - z0).norm_sq()) z0 = b;
    double seg_len = attract::distance(c.points[seg_idx], b);
    if (seg_len <= 0.0) seg_len = 1e-3;
    if (!newton_project(*s, z0, kOnCurveTol)) return (p - z0).norm();
    Vec2 grad = implicit_gradient(*s, z0);
    double gn = grad.norm();
    if (gn < 1e-12) return (p - z0).norm();
    Vec2 tangent = grad.perp() * (1.0 / gn);
    double best_d2 = (p - z0).norm_sq();
    auto d2 = [&](double step) {
      Vec2 cand = z0 + step * tangent;
      if (!newton_project(*s, cand, kOnCurveTol))
        return std::numeric_limits<double>::infinity();
      double d = (p - cand).norm_sq();
      best_d2 = std::min(best_d2, d);
      return d;
    };
    golden_min(d2, -2.0 * seg_len, 2.0 * seg_len, 70);
    return std::sqrt(best_d2);
  }

  return 0.0;  // not reached
}

double ManifoldGeometry::distance(Vec2 p) const {
  if (const auto* eq = std::get_if<EquilibriumSpec>(&spec_)) {
    return (p - eq->point).norm();
  }

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_chain = 0, best_seg = 0;
  for (std::size_t ci = 0; ci < chains_.size(); ++ci) {
    const Chain& c = chains_[ci];
    std::size_t n_seg = c.points.size() - (c.closed ? 0 : 1);
    for (std::size_t si = 0; si < n_seg; ++si) {
      Vec2 a = c.points[si];
      Vec2 b = c.points[(si + 1) % c.points.size()];
      Vec2 ab = b - a;
      double len2 = ab.norm_sq();
      double tau = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0)
                              : 0.0;
      double d = (p - (a + tau * ab)).norm();
      if (d < best) {
        best = d;
        best_chain = ci;
        best_seg = si;
      }
    }
  }
  // The polyline scan only picks the segment; the refined value is measured
  // against the exact curve. Chords cut corners on the concave side, so
  // min(best, refined) would bias the distance low by the chord sagitta.
  return refine_distance_on_curve(p, best_chain, best_seg);
}

// ---------------------------------------------------------------------------
// Frames

FrameSample ManifoldGeometry::frames(int n_base) const {
  if (n_base < 1) throw InvalidManifold("n_base must be at least 1");
  FrameSample out;
  out.frames.reserve(n_base);

  if (const auto* eq = std::get_if<EquilibriumSpec>(&spec_)) {
    for (int i = 0; i < n_base; ++i) {
      double theta = 2.0 * M_PI * i / n_base;
      Vec2 normal{std::cos(theta), std::sin(theta)};
      out.frames.push_back(Frame{eq->point, {normal.y, -normal.x}, normal,
                                 theta});
    }
    return out;
  }

  if (const auto* g = std::get_if<GraphSpec>(&spec_)) {
    for (int i = 0; i < n_base; ++i) {
      double u = n_base == 1 ? 0.5 * (g->lo + g->hi)
                             : g->lo + (g->hi - g->lo) * i / (n_base - 1);
      Vec2 tangent = graph_tangent(*g, u);
      out.frames.push_back(Frame{graph_point(*g, u), tangent, tangent.perp(),
                                 u});
    }
    return out;
  }

  if (const auto* p = std::get_if<ParametricSpec>(&spec_)) {
    for (int i = 0; i < n_base; ++i) {
      double t;
      if (p->closed) {
        t = p->t0 + (p->t1 - p->t0) * i / n_base;
      } else {
        t = n_base == 1 ? 0.5 * (p->t0 + p->t1)
                        : p->t0 + (p->t1 - p->t0) * i / (n_base - 1);
      }
      Vec2 v = parametric_velocity(*p, t);
      double speed = v.norm();
      if (speed < 1e-14) {
        ++out.singular_skipped;
        continue;
      }
      Vec2 tangent = v * (1.0 / speed);
      out.frames.push_back(Frame{parametric_point(*p, t), tangent,
                                 tangent.perp(), t});
    }
    return out;
  }

  const auto& s = std::get<ImplicitSpec>(spec_);
  // Distribute frames over the chains proportionally to length, then place
  // them evenly by arc length within each chain.
  double total_len = 0.0;
  std::vector<double> lens;
  for (const Chain& c : chains_) {
    double len = 0.0;
    std::size_t n_seg = c.points.size() - (c.closed ? 0 : 1);
    for (std::size_t i = 0; i < n_seg; ++i)
      len += attract::distance(c.points[i], c.points[(i + 1) % c.points.size()]);
    lens.push_back(len);
    total_len += len;
  }

  double arc_offset = 0.0;
  int assigned = 0;
  for (std::size_t ci = 0; ci < chains_.size(); ++ci) {
    const Chain& c = chains_[ci];
    int quota;
    if (ci + 1 == chains_.size()) {
      quota = n_base - assigned;
    } else {
      quota = static_cast<int>(std::round(n_base * lens[ci] / total_len));
      quota = std::max(quota, 1);
      quota = std::min(quota, n_base - assigned -
                                  static_cast<int>(chains_.size() - ci - 1));
    }
    if (quota <= 0) continue;
    assigned += quota;

    std::vector<double> cum(c.points.size() + (c.closed ? 1 : 0), 0.0);
    for (std::size_t i = 1; i < cum.size(); ++i)
      cum[i] = cum[i - 1] +
               attract::distance(c.points[i - 1], c.points[i % c.points.size()]);
    double len = cum.back();

    for (int k = 0; k < quota; ++k) {
      double target;
      if (c.closed) {
        target = len * k / quota;
      } else {
        target = quota == 1 ? 0.5 * len : len * k / (quota - 1);
      }
      auto it = std::upper_bound(cum.begin(), cum.end(), target);
      std::size_t seg = std::min<std::size_t>(
          cum.size() - 2, static_cast<std::size_t>(
                              std::max<std::ptrdiff_t>(0, it - cum.begin() - 1)));
      double seg_len = cum[seg + 1] - cum[seg];
      double tau = seg_len > 0.0 ? (target - cum[seg]) / seg_len : 0.0;
      Vec2 a = c.points[seg];
      Vec2 b = c.points[(seg + 1) % c.points.size()];
      Vec2 q = a + tau * (b - a);
      if (!newton_project(s, q, kOnCurveTol)) {
        ++out.singular_skipped;
        continue;
      }
      Vec2 grad = implicit_gradient(s, q);
      double gn = grad.norm();
      if (gn < 1e-12) {
        ++out.singular_skipped;
        continue;
      }
      Vec2 normal = grad * (1.0 / gn);
      out.frames.push_back(Frame{q, {normal.y, -normal.x}, normal,
                                 arc_offset + target});
    }
    arc_offset += len;
  }
  return out;
}

FrameSample sample_frames(const ManifoldSpec& m, int n_base) {
  return ManifoldGeometry(m).frames(n_base);
}

double distance_to_manifold(const ManifoldSpec& m, Vec2 p) {
  return ManifoldGeometry(m).distance(p);
}

}  // namespace attract
