#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace subgeom {

/// Execution policy for the Monte Carlo kernels.  Parallel uses OpenMP when
/// compiled in; Serial is the reference path the tests compare against.
enum class Exec { Serial, Parallel };

/**
 * Run f(i) for i in [0, n).  Results must be written to per-index slots so
 * the outcome cannot depend on thread count or schedule; reductions are done
 * serially by the caller afterwards.
 */
template <class F>
void for_index(std::int64_t n, Exec exec, F&& f) {
#ifdef _OPENMP
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) f(i);
        return;
    }
#else
    (void)exec;
#endif
    for (std::int64_t i = 0; i < n; ++i) f(i);
}

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace subgeom
