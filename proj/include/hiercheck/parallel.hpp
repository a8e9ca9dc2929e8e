#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hiercheck {

namespace detail {
/// Set on worker threads so nested parallel_for calls run inline.
inline thread_local bool in_parallel_worker = false;
}  // namespace detail

/**
 * @brief Calls body(i) for i in [0, n) on up to `threads` workers (0 = hardware).
 *
 * Work is split into contiguous blocks. Callers write results into slot i, so output
 * order never depends on scheduling. The first exception thrown by any worker is
 * rethrown after all workers join. Calls made from inside a worker run serially.
 */
template <typename Body>
void parallel_for(std::size_t n, Body&& body, std::size_t threads = 0) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n);
    if (threads <= 1 || detail::in_parallel_worker) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(threads);
    const std::size_t block = (n + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t begin = t * block;
        const std::size_t end = std::min(n, begin + block);
        workers.emplace_back([&, begin, end] {
            detail::in_parallel_worker = true;
            try {
                for (std::size_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace hiercheck
