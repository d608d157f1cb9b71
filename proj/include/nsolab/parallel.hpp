#pragma once

#include <cstddef>
#include <functional>

namespace nsolab {

/// Worker count: NSOLAB_JOBS if set to a positive integer, else the number of
/// logical cores (at least 1).
std::size_t default_jobs();

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Indices are
/// claimed dynamically; results must be written to per-index slots so the
/// outcome does not depend on scheduling. The first exception is rethrown
/// after all workers stop.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& body);

}  // namespace nsolab
