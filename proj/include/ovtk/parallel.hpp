#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ovtk {

/// Resolve a requested worker count; 0 means "use hardware concurrency".
inline unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

/// Run fn(begin, end) over a partition of [0, n). Chunks are contiguous and
/// workers write disjoint data, so results must not depend on the partition.
/// The first exception thrown by any worker is rethrown on the caller.
inline void parallel_for(std::size_t n, unsigned n_threads,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
    n_threads = std::max(1u, n_threads);
    if (n_threads == 1 || n < 2 * n_threads) {
        fn(0, n);
        return;
    }
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto guarded = [&](std::size_t b, std::size_t e) {
        try {
            fn(b, e);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    };
    const std::size_t chunk = (n + n_threads - 1) / n_threads;
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) {
        const std::size_t b = std::min(n, static_cast<std::size_t>(t) * chunk);
        const std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        workers.emplace_back(guarded, b, e);
    }
    for (auto& w : workers) w.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace ovtk
