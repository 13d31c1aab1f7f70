#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace scow {

/// Runs fn(0) .. fn(n-1) across up to `threads` workers. Indices are claimed
/// atomically, so callers needing deterministic output must write into
/// per-index slots. The first exception thrown by any call is rethrown after
/// all workers finish.
inline void parallel_for(std::uint64_t n, unsigned threads,
                         const std::function<void(std::uint64_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::uint64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(threads, n));
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const std::uint64_t i = next.fetch_add(1);
                    if (i >= n) return;
                    try {
                        fn(i);
                    } catch (...) {
                        const std::lock_guard<std::mutex> lock(error_mutex);
                        if (!error) error = std::current_exception();
                    }
                }
            });
    }
    if (error) std::rethrow_exception(error);
}

} // namespace scow
