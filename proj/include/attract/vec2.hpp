#pragma once

#include <algorithm>
#include <cmath>

namespace attract {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator-() const { return {-x, -y}; }

  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  double norm_sq() const { return x * x + y * y; }

  // Counterclockwise quarter turn.
  Vec2 perp() const { return {-y, x}; }

  Vec2 normalized() const {
    double n = norm();
    return {x / n, y / n};
  }
};

inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

// Axis-aligned rectangle, used for implicit-curve extraction windows and
// orbit escape checks.
struct Rect {
  double xlo = 0.0;
  double xhi = 0.0;
  double ylo = 0.0;
  double yhi = 0.0;

  double width() const { return xhi - xlo; }
  double height() const { return yhi - ylo; }
  Vec2 center() const { return {0.5 * (xlo + xhi), 0.5 * (ylo + yhi)}; }

  bool contains(Vec2 p) const {
    return p.x >= xlo && p.x <= xhi && p.y >= ylo && p.y <= yhi;
  }

  Rect include(Vec2 p) const {
    return {std::min(xlo, p.x), std::max(xhi, p.x),
            std::min(ylo, p.y), std::max(yhi, p.y)};
  }
};

}  // namespace attract
