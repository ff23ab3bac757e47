#pragma once

#include "attract/geometry.hpp"
#include "attract/parallel.hpp"

namespace attract {

// Residual of the invariance condition at sampled manifold points. For curves
// this is the normal component of the field, f . n_hat, which is zero exactly
// when the flow is tangent to the curve; for an equilibrium candidate it is
// |f(p)|. All variants are in velocity units, so the same tolerance applies
// across manifold shapes.
struct InvarianceReport {
  double max_residual = 0.0;
  double mean_residual = 0.0;
  int n_points = 0;
  int singular_skipped = 0;
  double tol = 1e-8;
  bool pass = false;
};

InvarianceReport invariance_residual(const VectorField& field,
                                     const ManifoldGeometry& geom,
                                     int n_points, double tol = 1e-8,
                                     const par::ExecPolicy& policy = {});

InvarianceReport invariance_residual(const VectorField& field,
                                     const ManifoldSpec& m, int n_points,
                                     double tol = 1e-8,
                                     const par::ExecPolicy& policy = {});

}  // namespace attract
