#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "attract/expr.hpp"
#include "attract/vec2.hpp"

namespace attract {

struct VectorField {
  Expr fx;
  Expr fy;

  Vec2 eval(Vec2 p) const { return {fx.eval(p.x, p.y), fy.eval(p.x, p.y)}; }
};

// Candidate invariant manifold, one of four shapes.

struct EquilibriumSpec {
  Vec2 point;
};

struct GraphSpec {
  enum class Axis { YofX, XofY };
  Axis axis = Axis::YofX;
  Expr fn;       // y = fn(x) or x = fn(y) depending on axis
  double lo = 0.0;
  double hi = 0.0;
};

struct ImplicitSpec {
  Expr f;        // zero set of f(x, y) inside the window
  Rect window;
};

struct ParametricSpec {
  Expr cx;       // components as functions of t
  Expr cy;
  double t0 = 0.0;
  double t1 = 0.0;
  bool closed = false;
};

using ManifoldSpec =
    std::variant<EquilibriumSpec, GraphSpec, ImplicitSpec, ParametricSpec>;

// Local frame at a manifold point. tangent and normal are unit length,
// orthogonal, and normal equals tangent rotated +90 degrees. arc_param is
// strictly increasing along the sampled curve (angle for equilibria, x or y
// for graphs, t for parametric curves, cumulative arc length for implicit
// curves).
struct Frame {
  Vec2 base;
  Vec2 tangent;
  Vec2 normal;
  double arc_param = 0.0;
};

struct FrameSample {
  std::vector<Frame> frames;
  int singular_skipped = 0;  // implicit points where the gradient vanished
};

struct InvalidManifold : std::runtime_error {
  explicit InvalidManifold(const std::string& what);
};

struct EmptyManifold : std::runtime_error {
  explicit EmptyManifold(const std::string& what);
};

// Precomputed geometry for one manifold: extracted polylines, bounding box,
// orientation. Build once, then query distances and frames repeatedly.
class ManifoldGeometry {
 public:
  explicit ManifoldGeometry(const ManifoldSpec& spec);

  const ManifoldSpec& spec() const { return spec_; }
  bool is_point() const;
  bool is_closed_curve() const;

  // Closed parametric curves only: true when the curve winds counterclockwise.
  bool counterclockwise() const { return ccw_; }

  // Shortest distance from p to the manifold. Polyline search plus one local
  // refinement on the underlying curve; accurate to about 1e-9 near the
  // manifold.
  double distance(Vec2 p) const;

  FrameSample frames(int n_base) const;

  Rect bounding_box() const { return bbox_; }

  // Window centered on the bounding box with a 4x margin, floored at
  // half-width 1 so point manifolds get a usable window.
  Rect default_window() const;

  // Extracted polylines (one per connected chain) for rendering.
  struct Chain {
    std::vector<Vec2> points;
    std::vector<double> params;  // curve parameter per point
    bool closed = false;
  };
  const std::vector<Chain>& chains() const { return chains_; }

 private:
  void build_graph_chain();
  void build_parametric_chain();
  void build_implicit_chains();
  double refine_distance_on_curve(Vec2 p, std::size_t chain_idx,
                                  std::size_t seg_idx) const;

  ManifoldSpec spec_;
  std::vector<Chain> chains_;
  Rect bbox_;
  bool ccw_ = false;
};

FrameSample sample_frames(const ManifoldSpec& m, int n_base);
double distance_to_manifold(const ManifoldSpec& m, Vec2 p);

}  // namespace attract
