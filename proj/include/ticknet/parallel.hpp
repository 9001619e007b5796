#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ticknet {

/// Run fn(i) for i in [0, n) across worker threads. Each index owns its
/// output slot and its own derived RNG stream, so results are identical to a
/// serial run regardless of scheduling. threads == 0 means hardware
/// concurrency; threads == 1 runs inline.
template <typename Fn>
void parallel_for(size_t n, Fn&& fn, unsigned threads = 0) {
    if (threads == 0) threads = std::thread::hardware_concurrency();
    if (threads <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    if (threads > n) threads = static_cast<unsigned>(n);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (size_t i = t; i < n; i += threads) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace ticknet
