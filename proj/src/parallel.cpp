#include "fusegraph/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace fusegraph {

namespace {

std::atomic<int> g_override{0};

int env_workers() {
    const char* raw = std::getenv("FUSEGRAPH_THREADS");
    if (raw == nullptr) return 0;
    try {
        const int value = std::stoi(raw);
        return value > 0 ? value : 0;
    } catch (...) {
        return 0;
    }
}

}  // namespace

int worker_count() {
    if (const int forced = g_override.load(); forced > 0) return forced;
    if (const int env = env_workers(); env > 0) return env;
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_worker_count(int workers) { g_override.store(workers > 0 ? workers : 0); }

}  // namespace fusegraph
