#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace wander {

/// Global worker cap (CLI --threads). 0 means hardware concurrency.
inline int& thread_cap() {
    static int cap = 0;
    return cap;
}

inline int effective_threads(std::size_t n) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    int t = thread_cap() > 0 ? thread_cap() : static_cast<int>(hw);
    if (static_cast<std::size_t>(t) > n) t = static_cast<int>(n);
    return t < 1 ? 1 : t;
}

/// Static-partition parallel loop. fn(i) must write only to slot i state, so
/// results are identical for any thread count. The first worker exception is
/// rethrown on the caller thread.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t grain = 256) {
    if (n == 0) return;
    const int nt = effective_threads((n + grain - 1) / grain);
    if (nt <= 1 || n < 2 * grain) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const std::size_t chunk = (n + nt - 1) / nt;
    std::atomic<int> err_guard{0};
    for (int t = 0; t < nt; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        pool.emplace_back([&, lo, hi]() {
            try {
                for (std::size_t i = lo; i < hi && !failed.load(std::memory_order_relaxed); ++i) fn(i);
            } catch (...) {
                if (err_guard.fetch_add(1) == 0) err = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

} // namespace wander
