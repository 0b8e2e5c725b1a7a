#include "vixexp/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace vixexp {

int thread_count() {
    if (const char* s = std::getenv("VIXEXP_THREADS")) {
        try {
            int n = std::stoi(s);
            if (n > 0) return n;
        } catch (...) {
        }
    }
    return omp_get_max_threads();
}

}  // namespace vixexp
