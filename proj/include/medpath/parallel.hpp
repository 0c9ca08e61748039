#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace medpath {

// Work dispatch for the data-parallel loops (grid points, replicates,
// screening columns). jobs <= 1 runs the plain serial loop, which is kept
// as the reference path for testing; jobs > 1 runs the same body under
// OpenMP. Every task writes only to its own output slot, so results are
// identical regardless of scheduling.
void parallel_for(std::size_t count, int jobs,
                  const std::function<void(std::size_t)>& body);

// Default worker count: MEDPATH_JOBS env var, else hardware concurrency.
int default_jobs();

}  // namespace medpath
