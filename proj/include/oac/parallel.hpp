#pragma once

#include <omp.h>

#include <cstdlib>
#include <string>

namespace oac {

// Worker count for the parallel kernels: the OAC_THREADS environment
// variable when set (clamped to >= 1), otherwise the OpenMP default.  Read
// fresh on every call so tests can adjust it at runtime.
inline int worker_count() {
    if (const char* env = std::getenv("OAC_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (...) {
        }
    }
    return omp_get_max_threads();
}

}  // namespace oac
