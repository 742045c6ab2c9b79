#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace openobj {

// Static block partition of [0, n) over `threads` workers. Results must be
// written to disjoint slots; no synchronization is provided.
inline void parallel_for(int64_t n, int threads, const std::function<void(int64_t)>& fn) {
    if (threads <= 1 || n < 2) {
        for (int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    int workers = int(std::min<int64_t>(threads, n));
    std::vector<std::thread> pool;
    pool.reserve(size_t(workers));
    for (int w = 0; w < workers; ++w) {
        int64_t lo = n * w / workers;
        int64_t hi = n * (w + 1) / workers;
        pool.emplace_back([lo, hi, &fn] {
            for (int64_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace openobj
