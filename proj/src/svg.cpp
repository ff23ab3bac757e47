#include "attract/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace attract {

namespace {

// SVG's y axis points down; flip world y on output.
std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void polyline(std::ostream& out, const std::vector<Vec2>& pts,
              const char* color, double stroke, bool close) {
  if (pts.size() < 2) return;
  out << (close ? "<polygon" : "<polyline") << " points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out << " ";
    out << num(pts[i].x) << "," << num(-pts[i].y);
  }
  out << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
      << num(stroke) << "\"/>\n";
}

std::vector<Vec2> thinned(const std::vector<Vec2>& pts, std::size_t max_pts) {
  if (pts.size() <= max_pts) return pts;
  std::vector<Vec2> out;
  std::size_t stride = (pts.size() + max_pts - 1) / max_pts;
  for (std::size_t i = 0; i < pts.size(); i += stride) out.push_back(pts[i]);
  if (!((pts.size() - 1) % stride == 0)) out.push_back(pts.back());
  return out;
}

}  // namespace

void emit_svg(const AnalysisResult& result,
              const std::vector<OrbitTrace>& traces, std::ostream& out) {
  // View box: union of the effective windows.
  Rect view{};
  bool have_view = false;
  for (const ManifoldResult& mr : result.manifolds) {
    if (!mr.oracle) continue;
    if (!have_view) {
      view = mr.oracle_window;
      have_view = true;
    } else {
      view = view.include({mr.oracle_window.xlo, mr.oracle_window.ylo});
      view = view.include({mr.oracle_window.xhi, mr.oracle_window.yhi});
    }
  }
  if (!have_view && result.config.oracle.window) {
    view = *result.config.oracle.window;
    have_view = true;
  }
  if (!have_view) view = {-4.0, 4.0, -4.0, 4.0};

  double w = view.width();
  double h = view.height();
  double stroke = 0.0025 * std::max(w, h);

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\""
      << num(view.xlo) << " " << num(-view.yhi) << " " << num(w) << " "
      << num(h) << "\" width=\"800\" height=\"" << num(800.0 * h / w)
      << "\">\n";
  out << "<rect x=\"" << num(view.xlo) << "\" y=\"" << num(-view.yhi)
      << "\" width=\"" << num(w) << "\" height=\"" << num(h)
      << "\" fill=\"white\"/>\n";

  // Orbits first so manifolds and ticks stay visible on top.
  for (const OrbitTrace& trace : traces) {
    polyline(out, thinned(trace.points, 2000), "green", stroke, false);
  }

  for (std::size_t mi = 0; mi < result.manifolds.size(); ++mi) {
    const ManifoldEntry& entry = result.config.manifolds[mi];
    if (const auto* eq = std::get_if<EquilibriumSpec>(&entry.spec)) {
      out << "<circle cx=\"" << num(eq->point.x) << "\" cy=\""
          << num(-eq->point.y) << "\" r=\"" << num(3.0 * stroke)
          << "\" fill=\"black\"/>\n";
    } else {
      ManifoldGeometry geom(entry.spec);
      for (const auto& chain : geom.chains()) {
        polyline(out, thinned(chain.points, 1500), "black", 1.5 * stroke,
                 chain.closed);
      }
    }

    const ManifoldResult& mr = result.manifolds[mi];
    if (!mr.samples) continue;
    double zero_tol = result.config.tube.zero_tol;
    double half_tick =
        0.5 * (result.config.tube.eps_max - result.config.tube.eps_min) /
        std::max(1, result.config.tube.n_offsets - 1);
    if (half_tick <= 0.0) half_tick = 0.5 * result.config.tube.eps_max;
    for (const TubeSample& s : *mr.samples) {
      if (s.excluded) continue;
      const char* color = "gray";
      if (s.ip < -zero_tol) color = "blue";
      else if (s.ip > zero_tol) color = "red";
      Vec2 a = s.point - half_tick * s.n_hat;
      Vec2 b = s.point + half_tick * s.n_hat;
      out << "<line x1=\"" << num(a.x) << "\" y1=\"" << num(-a.y)
          << "\" x2=\"" << num(b.x) << "\" y2=\"" << num(-b.y)
          << "\" stroke=\"" << color << "\" stroke-width=\"" << num(stroke)
          << "\"/>\n";
    }
  }

  out << "</svg>\n";
}

}  // namespace attract
