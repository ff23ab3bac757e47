#include "attract/invariance.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace attract {

InvarianceReport invariance_residual(const VectorField& field,
                                     const ManifoldGeometry& geom,
                                     int n_points, double tol,
                                     const par::ExecPolicy& policy) {
  InvarianceReport report;
  report.tol = tol;

  if (geom.is_point()) {
    const auto& eq = std::get<EquilibriumSpec>(geom.spec());
    double r = field.eval(eq.point).norm();
    report.max_residual = r;
    report.mean_residual = r;
    report.n_points = 1;
    report.pass = r <= tol;
    return report;
  }

  FrameSample fs = geom.frames(n_points);
  report.singular_skipped = fs.singular_skipped;
  const long n = static_cast<long>(fs.frames.size());
  report.n_points = static_cast<int>(n);
  if (n == 0) {
    report.max_residual = std::numeric_limits<double>::infinity();
    report.pass = false;
    return report;
  }

  // Normal component of the field at each base point; the frames are unit
  // normalized, so this is a speed regardless of how the curve was presented.
  std::vector<double> residual(n, 0.0);
  const int nt = par::resolve_threads(policy);
  (void)nt;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nt) \
    if (policy.parallel && nt > 1)
#endif
  for (long i = 0; i < n; ++i) {
    try {
      residual[i] = std::fabs(field.eval(fs.frames[i].base)
                                  .dot(fs.frames[i].normal));
    } catch (const DomainError&) {
      residual[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }

  // Serial reduction keeps the result identical across thread counts.
  double max_r = 0.0;
  double sum = 0.0;
  int counted = 0;
  int failed = 0;
  for (long i = 0; i < n; ++i) {
    if (std::isnan(residual[i])) {
      ++failed;
      continue;
    }
    max_r = std::max(max_r, residual[i]);
    sum += residual[i];
    ++counted;
  }
  report.singular_skipped += failed;
  if (counted == 0) {
    report.max_residual = std::numeric_limits<double>::infinity();
    report.pass = false;
    return report;
  }
  report.max_residual = max_r;
  report.mean_residual = sum / counted;
  report.pass = max_r <= tol;
  return report;
}

InvarianceReport invariance_residual(const VectorField& field,
                                     const ManifoldSpec& m, int n_points,
                                     double tol, const par::ExecPolicy& policy) {
  ManifoldGeometry geom(m);
  return invariance_residual(field, geom, n_points, tol, policy);
}

}  // namespace attract
