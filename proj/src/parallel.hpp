#pragma once

#include "jumpctl/types.hpp"

#include <atomic>
#include <exception>
#include <mutex>

namespace jumpctl::detail {

// Runs body(i) for i in [0, n), on the OpenMP team or serially. The first
// exception thrown by any iteration is rethrown on the calling thread.
template <class Body>
void for_each_index(int n, Execution exec, Body&& body, int chunk = 16)
{
    std::exception_ptr error;
    std::mutex m;
    std::atomic<bool> failed{false};
    auto guarded = [&](int i) {
        if (failed.load(std::memory_order_relaxed))
            return;
        try {
            body(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(m);
            if (!error)
                error = std::current_exception();
            failed = true;
        }
    };
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, chunk)
        for (int i = 0; i < n; ++i)
            guarded(i);
    } else {
        for (int i = 0; i < n; ++i)
            guarded(i);
    }
    if (error)
        std::rethrow_exception(error);
}

}  // namespace jumpctl::detail
