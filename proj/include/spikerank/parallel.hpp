#pragma once

#include <cstddef>
#include <functional>

namespace spikerank {

// Worker cap: SPIKERANK_THREADS if set and positive, else hardware concurrency.
std::size_t max_threads();

// Runs body(begin, end) over disjoint chunks of [0, count). Falls back to a
// single inline call when count < min_chunk or only one thread is allowed.
void parallel_for(std::size_t count, std::size_t min_chunk,
                  const std::function<void(std::size_t, std::size_t)>& body);

} // namespace spikerank
