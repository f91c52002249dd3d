#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace scprop {

/// Thread count from SCPROP_THREADS (0 or unset: runtime default).
inline int thread_hint_from_env() {
    const char* v = std::getenv("SCPROP_THREADS");
    if (!v || !*v) return 0;
    try {
        return std::max(0, std::stoi(v));
    } catch (...) {
        return 0;
    }
}

inline void set_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

}  // namespace scprop
