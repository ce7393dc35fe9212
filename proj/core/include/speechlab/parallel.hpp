#pragma once

#include <cstddef>
#include <functional>

namespace speechlab {

/// Worker count: SPEECHLAB_THREADS when set to a positive integer, else the
/// hardware concurrency, never more than `jobs` and never less than one.
std::size_t worker_count(std::size_t jobs);

/// Runs body(i) for i in [0, jobs) on up to `threads` workers (0 means
/// worker_count(jobs)). Each index runs exactly once. The first exception
/// thrown by any body is rethrown after all workers finish.
void parallel_for(std::size_t jobs, const std::function<void(std::size_t)>& body, std::size_t threads = 0);

}  // namespace speechlab
