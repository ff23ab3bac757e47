#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "attract/criterion.hpp"
#include "attract/geometry.hpp"
#include "attract/parallel.hpp"

namespace attract {

// One classical fixed-step RK4 update. Propagates DomainError from field
// evaluation.
Vec2 rk4_step(const VectorField& field, Vec2 p, double h);

struct OrbitTrace {
  Vec2 seed;
  std::vector<double> times;
  std::vector<Vec2> points;
  std::vector<double> distances;  // distance to the manifold at each time
  bool escaped = false;           // left the window before reaching T
  bool failed = false;            // field evaluation failed or blew up
  std::string note;
};

// Integrates from seed over [0, T] with fixed step h, recording every step.
// Stops early when the point leaves the window (the exit point is recorded
// and the trace flagged) or when evaluation fails.
OrbitTrace integrate_orbit(const VectorField& field, Vec2 seed, double h,
                           double T, const ManifoldGeometry& geom,
                           Rect window);

enum class OracleResult { Attractive, Repulsive, Inconclusive };

const char* to_string(OracleResult r);

struct OracleVerdict {
  OracleResult verdict = OracleResult::Inconclusive;
  double contraction_ratio = 0.0;  // median of d(T)/d(0) over surviving seeds
  int seeds_used = 0;
  int escaped = 0;
  int failed = 0;
};

// Seed points for the oracle: tube frame bases pushed out by eps_max on every
// side, in side-major order, subsampled with an even stride to at most
// max_seeds so every side stays represented.
std::vector<Vec2> tube_seeds(const ManifoldGeometry& geom,
                             const TubeConfig& cfg, int max_seeds = 64);

// Integrates a batch of tube seeds and votes: majority escape or median
// distance growth beyond 10x means Repulsive, median contraction below 0.1
// means Attractive, anything else (or mostly failed orbits) Inconclusive.
OracleVerdict oracle_verdict(const VectorField& field,
                             const ManifoldGeometry& geom,
                             const TubeConfig& cfg, double h, double T,
                             Rect window, const par::ExecPolicy& policy = {});

// CSV dump: header t,x,y,dist then one row per kept step, 6 significant
// digits, evenly strided down to at most max_rows rows (the final step is
// always kept).
void write_orbit_csv(const OrbitTrace& trace, std::ostream& out,
                     int max_rows = 10000);

}  // namespace attract
