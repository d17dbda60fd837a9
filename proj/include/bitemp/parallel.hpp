#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bitemp {

inline unsigned resolve_workers(unsigned workers) {
    if (workers != 0) return workers;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Calls f(i) for i in [begin, end) on up to `workers` threads. Each index is
// handled exactly once; callers write results by index, so the outcome does
// not depend on the worker count.
template <class F>
void parallel_for(std::size_t begin, std::size_t end, unsigned workers, F&& f) {
    if (end <= begin) return;
    const std::size_t n = end - begin;
    unsigned w = std::min<std::size_t>(resolve_workers(workers), n);
    if (w <= 1) {
        for (std::size_t i = begin; i < end; ++i) f(i);
        return;
    }
    std::exception_ptr error;
    std::mutex m;
    std::vector<std::thread> threads;
    for (unsigned k = 0; k < w; ++k)
        threads.emplace_back([&, k] {
            try {
                for (std::size_t i = begin + k; i < end; i += w) f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(m);
                if (!error) error = std::current_exception();
            }
        });
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace bitemp
