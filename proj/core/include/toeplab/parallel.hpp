#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace toeplab {

// Runs fn(0..n-1) on up to `threads` workers. Each index is handled exactly once, so callers that write
// results by index get the same output for any thread count. The first exception (by index) is rethrown.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    std::vector<std::exception_ptr> errors(n);
    auto guarded = [&](std::size_t i) {
        try {
            fn(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) guarded(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
        for (std::size_t t = 0; t < workers; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) guarded(i);
            });
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace toeplab
