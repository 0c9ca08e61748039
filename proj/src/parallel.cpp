#include "medpath/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>
#include <thread>

namespace medpath {

void parallel_for(std::size_t count, int jobs,
                  const std::function<void(std::size_t)>& body) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs) shared(err)
    for (long long i = 0; i < static_cast<long long>(count); ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
}

int default_jobs() {
    if (const char* env = std::getenv("MEDPATH_JOBS")) {
        try {
            int j = std::stoi(env);
            if (j >= 1) return j;
        } catch (...) {
            // fall through to hardware default
        }
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace medpath
