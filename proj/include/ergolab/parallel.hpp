#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace ergolab {

// Worker count: ERGOLAB_THREADS overrides hardware concurrency.
inline int worker_count() {
    if (const char* env = std::getenv("ERGOLAB_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static chunking over [0, n). Each index is processed exactly once and
// writes only its own slot, so results are identical for any worker count.
template <typename Fn>
void parallel_for(std::int64_t n, Fn&& fn) {
    int workers = std::min<std::int64_t>(worker_count(), std::max<std::int64_t>(n, 1));
    if (workers <= 1) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    std::int64_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        std::int64_t lo = w * chunk;
        std::int64_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::int64_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (std::thread& t : pool) t.join();
}

}  // namespace ergolab
