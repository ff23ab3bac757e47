#include <chrono>
#include <cstdio>
#include <functional>

#include "attract/criterion.hpp"
#include "attract/expr.hpp"
#include "attract/geometry.hpp"
#include "attract/invariance.hpp"
#include "attract/oracle.hpp"
#include "attract/parallel.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm up caches and lazy allocations
  auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) fn();
  auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-24s %10.2f ms %10.2f ms %8.2fx\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main() {
  using namespace attract;

  par::ExecPolicy parallel = par::from_env();
  par::ExecPolicy serial = par::serial();
  std::printf("threads: %d\n\n", par::resolve_threads(parallel));
  std::printf("%-24s %13s %13s %9s\n", "kernel", "serial", "parallel",
              "speedup");

  VectorField hopf{parse_expression("-y - x*(x^2 + y^2 - 1)", VarSet::xy()),
                   parse_expression("x - y*(x^2 + y^2 - 1)", VarSet::xy())};
  ParametricSpec circle{parse_expression("cos(t)", VarSet::only_t()),
                        parse_expression("sin(t)", VarSet::only_t()),
                        0.0, 6.283185307179586, true};
  ManifoldGeometry geom{ManifoldSpec{circle}};

  {
    TubeConfig cfg;
    cfg.n_base = 4096;
    cfg.n_offsets = 16;
    double s = time_ms([&] { sample_tube(hopf, geom, cfg, serial); }, 3);
    double p = time_ms([&] { sample_tube(hopf, geom, cfg, parallel); }, 3);
    report("sample_tube", s, p);
  }

  {
    double s = time_ms(
        [&] { invariance_residual(hopf, geom, 200000, 1e-8, serial); }, 3);
    double p = time_ms(
        [&] { invariance_residual(hopf, geom, 200000, 1e-8, parallel); }, 3);
    report("invariance_residual", s, p);
  }

  {
    TubeConfig cfg;
    Rect window{-4.0, 4.0, -4.0, 4.0};
    double s = time_ms(
        [&] { oracle_verdict(hopf, geom, cfg, 1e-3, 10.0, window, serial); },
        1);
    double p = time_ms(
        [&] { oracle_verdict(hopf, geom, cfg, 1e-3, 10.0, window, parallel); },
        1);
    report("oracle_verdict", s, p);
  }

  return 0;
}
