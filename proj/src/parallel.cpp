#include "gpalign/parallel.hpp"

#include <cstdlib>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace gpalign {

namespace {
int g_workers = 0;  // 0 = unresolved

int default_workers() {
  if (const char* env = std::getenv("GPALIGN_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}
}  // namespace

int workers() {
  if (g_workers == 0) g_workers = default_workers();
  return g_workers;
}

void set_workers(int count) { g_workers = count >= 1 ? count : 0; }

void parallel_for(int count, const std::function<void(int)>& fn) {
  const int w = workers();
  if (w <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) num_threads(w)
  for (int i = 0; i < count; ++i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
#else
  for (int i = 0; i < count; ++i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
#endif
  for (int i = 0; i < count; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);
}

}  // namespace gpalign
