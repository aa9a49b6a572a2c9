#pragma once

#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace wordrec {

// Every parallel loop in the library also has a serial path that performs the
// exact same per-index work. Results are combined in index order by the
// callers, so the two modes are bit-identical; tests assert that.
enum class ExecMode { Serial, OpenMP };

inline const char* to_string(ExecMode m) {
  return m == ExecMode::Serial ? "serial" : "openmp";
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Runs fn(i) for i in [0, n). fn(i) must only touch state owned by index i.
template <class F>
void parallel_for(int n, ExecMode mode, F&& fn) {
#ifdef _OPENMP
  if (mode == ExecMode::OpenMP) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
#else
  (void)mode;
#endif
  for (int i = 0; i < n; ++i) fn(i);
}

}  // namespace wordrec
