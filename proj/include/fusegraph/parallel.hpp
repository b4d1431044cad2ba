#pragma once

/** \file parallel.hpp
 *  \brief OpenMP loop helper used by every data-parallel kernel.
 *
 * Kernels write into pre-sized output slots indexed by the loop variable, so
 * results never depend on scheduling. Exceptions thrown inside the loop body
 * are captured and the one from the lowest index is rethrown after the loop.
 */

#include <cstddef>
#include <cstdint>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fusegraph {

/// Worker count: FUSEGRAPH_THREADS if set and positive, else the OpenMP default.
int worker_count();

/// Overrides the worker count for this process (0 restores the default).
void set_worker_count(int workers);

template <typename Body>
void parallel_for(std::size_t count, Body&& body) {
    if (count == 0) return;
    std::vector<std::exception_ptr> failures(count);
    const auto n = static_cast<std::int64_t>(count);
    const int workers = worker_count();
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            failures[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& failure : failures) {
        if (failure) std::rethrow_exception(failure);
    }
}

}  // namespace fusegraph
