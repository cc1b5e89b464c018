#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cwkb {

// Execution mode for the data-parallel kernels.  Every parallel kernel keeps
// a serial reference path; tests compare the two and the bench tool times them.
enum class Exec { serial, parallel };

#ifdef _OPENMP
inline int max_threads() { return omp_get_max_threads(); }
inline void set_threads(int n) {
    if (n > 0) omp_set_num_threads(n);
}
#else
inline int max_threads() { return 1; }
inline void set_threads(int) {}
#endif

// Static schedule so the parallel path produces bitwise-identical results
// to the serial one for pure per-index work.
template <class F>
void for_each_index(std::size_t n, Exec mode, F&& f) {
    if (mode == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long long i = 0; i < static_cast<long long>(n); ++i) f(static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < n; ++i) f(i);
    }
}

}  // namespace cwkb
