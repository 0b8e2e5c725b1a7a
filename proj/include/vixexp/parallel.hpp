#pragma once

#include <exception>
#include <mutex>

namespace vixexp {

enum class Exec { serial, parallel };

// Thread count from VIXEXP_THREADS, else the OpenMP default.
int thread_count();

// Runs f(i) for i in [0, n). Exceptions thrown by f are rethrown on the caller's thread.
template <class F>
void for_each_index(int n, Exec exec, F&& f) {
    if (exec == Exec::serial || n < 2) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::exception_ptr err;
    std::mutex m;
#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (int i = 0; i < n; ++i) {
        try {
            f(i);
        } catch (...) {
            std::lock_guard<std::mutex> lk(m);
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
}

}  // namespace vixexp
