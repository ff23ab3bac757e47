#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "attract/geometry.hpp"
#include "attract/parallel.hpp"

namespace attract {

// Transverse tube used to probe the field around a manifold: n_base frames
// along the curve, n_offsets offsets per side spaced uniformly in
// [eps_min, eps_max]. Inner products with magnitude <= zero_tol count as zero.
struct TubeConfig {
  double eps_min = 1e-3;
  double eps_max = 0.25;
  int n_offsets = 8;
  int n_base = 64;
  double zero_tol = 1e-9;
};

// Which side of the manifold a sample lies on. Closed curves distinguish
// inward/outward, open curves the two normal half-spaces, equilibria pool all
// radial directions into one side (the direction angle stays available as the
// frame's arc_param).
enum class Side { Radial, Plus, Minus, Inward, Outward };

enum class SideVerdict { Attractive, Repulsive, Neutral, Indefinite };
enum class OverallVerdict { Attractive, Repulsive, Neutral, Indefinite, Mixed };

const char* to_string(Side s);
const char* to_string(SideVerdict v);
const char* to_string(OverallVerdict v);

struct TubeSample {
  Frame frame;
  Side side = Side::Radial;
  double offset = 0.0;  // distance from base along n_hat
  Vec2 n_hat;           // unit vector from base toward the sample point
  Vec2 point;           // frame.base + offset * n_hat
  Vec2 f;               // field at the sample point
  double ip = 0.0;      // f . n_hat
  bool excluded = false;
  std::string exclude_reason;
};

struct SideClassification {
  SideVerdict verdict = SideVerdict::Indefinite;
  double min_ip = 0.0;
  double max_ip = 0.0;
  int n_samples = 0;
  int n_excluded = 0;
  // Extremal witnesses: present when the corresponding sign actually occurs
  // beyond zero_tol.
  std::optional<TubeSample> witness_attract;  // most negative inner product
  std::optional<TubeSample> witness_repel;    // most positive inner product
};

struct ManifoldClassification {
  std::vector<std::pair<Side, SideClassification>> per_side;
  OverallVerdict overall = OverallVerdict::Indefinite;
  int singular_skipped = 0;
};

struct EmptySide : std::runtime_error {
  explicit EmptySide(const std::string& what);
};

struct AllSamplesExcluded : std::runtime_error {
  explicit AllSamplesExcluded(const std::string& what);
};

// Field inner product with the unit normal n_hat at distance r from base:
// f(base + r * n_hat) . n_hat. Negative means the flow pushes the sample
// toward the base.
double inner_product_at(const VectorField& field, Vec2 base, Vec2 n_hat,
                        double r);

std::vector<Side> sides_for(const ManifoldGeometry& geom);

// Samples the whole tube. Result is ordered by (arc_param, side, offset) and
// is identical for the serial and parallel policies. Field evaluation errors
// mark the sample excluded rather than aborting. Throws AllSamplesExcluded
// when nothing evaluates.
std::vector<TubeSample> sample_tube(const VectorField& field,
                                    const ManifoldGeometry& geom,
                                    const TubeConfig& cfg,
                                    const par::ExecPolicy& policy = {});

SideClassification classify_side(std::span<const TubeSample> samples,
                                 double zero_tol);

// Groups already-computed tube samples by side and combines the side verdicts
// into an overall one.
ManifoldClassification classify_samples(std::span<const TubeSample> samples,
                                        std::span<const Side> sides,
                                        double zero_tol);

ManifoldClassification classify_manifold(const VectorField& field,
                                         const ManifoldGeometry& geom,
                                         const TubeConfig& cfg,
                                         const par::ExecPolicy& policy = {});

}  // namespace attract
