#ifndef OODKIT_PARALLEL_HPP
#define OODKIT_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace oodkit {

/// Worker count from OODKIT_THREADS, else the hardware concurrency (min 1).
std::size_t default_workers();

/**
 * Runs `body(begin, end)` over contiguous chunks of [0, n) on up to
 * `workers` threads. Chunks never overlap, so bodies that write only to
 * their own index range produce output independent of the worker count.
 * The first exception thrown by any chunk is rethrown on the caller.
 */
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace oodkit

#endif  // OODKIT_PARALLEL_HPP
