#include "attract/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace attract::par {

ExecPolicy from_env() {
  ExecPolicy policy;
  const char* raw = std::getenv("ATTRACT_THREADS");
  if (raw == nullptr || *raw == '\0') return policy;
  char* end = nullptr;
  long v = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || v < 0) return policy;  // ignore junk
  policy.max_threads = static_cast<int>(v);
  return policy;
}

int resolve_threads(const ExecPolicy& policy) {
  if (!policy.parallel) return 1;
  int n = 1;
#ifdef _OPENMP
  n = omp_get_max_threads();
#endif
  if (policy.max_threads > 0 && policy.max_threads < n) n = policy.max_threads;
  return n < 1 ? 1 : n;
}

}  // namespace attract::par
