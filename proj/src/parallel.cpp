#include "equivcheck/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace equivcheck {

namespace {
std::atomic<int> g_jobs{0};
}

void set_jobs(int jobs) { g_jobs = jobs < 0 ? 0 : jobs; }

int jobs() {
    const int j = g_jobs.load();
    if (j > 0) {
        return j;
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

int resolve_jobs(int cli_jobs) {
    if (cli_jobs > 0) {
        return cli_jobs;
    }
    if (const char* env = std::getenv("EQUIVCHECK_JOBS")) {
        try {
            const int j = std::stoi(env);
            if (j > 0) {
                return j;
            }
        } catch (const std::exception&) {
            // ignore malformed values
        }
    }
    return 0;
}

}  // namespace equivcheck
