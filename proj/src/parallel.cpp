#include "spikerank/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spikerank {

std::size_t max_threads() {
    std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const char* env = std::getenv("SPIKERANK_THREADS");
    if (env == nullptr) return hw;
    std::size_t cap = 0;
    auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), cap);
    if (ec != std::errc{} || cap == 0) return hw;
    return cap;
}

void parallel_for(std::size_t count, std::size_t min_chunk,
                  const std::function<void(std::size_t, std::size_t)>& body) {
    if (count == 0) return;
    min_chunk = std::max<std::size_t>(min_chunk, 1);
    std::size_t workers = std::min(max_threads(), (count + min_chunk - 1) / min_chunk);
    if (workers <= 1) {
        body(0, count);
        return;
    }
    std::size_t chunk = (count + workers - 1) / workers;

    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto guarded = [&](std::size_t begin, std::size_t end) {
        try {
            body(begin, end);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (std::size_t w = 1; w < workers; ++w) {
            std::size_t begin = w * chunk;
            std::size_t end = std::min(count, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(guarded, begin, end);
        }
        guarded(0, std::min(count, chunk));
    }
    if (failure) std::rethrow_exception(failure);
}

} // namespace spikerank
