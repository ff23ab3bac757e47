#pragma once

namespace attract::par {

// Execution policy for the data-parallel kernels (tube sampling, residual
// scans, orbit batches). Every kernel also has a serial path that produces
// bitwise-identical results; tests compare the two.
struct ExecPolicy {
  bool parallel = true;
  int max_threads = 0;  // 0 = let the runtime decide
};

// Reads ATTRACT_THREADS: unset or "0" means auto, a positive integer caps the
// worker count. Invalid values fall back to auto.
ExecPolicy from_env();

// Number of workers a kernel should actually use under this policy (>= 1).
int resolve_threads(const ExecPolicy& policy);

inline ExecPolicy serial() { return {false, 1}; }

}  // namespace attract::par
