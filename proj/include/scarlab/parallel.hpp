#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace scarlab {

/// Chunked parallel loop over [0, n). Workers write disjoint output ranges,
/// so results do not depend on the thread count.
inline void parallel_for_chunks(std::size_t n, int threads,
                                const std::function<void(std::size_t, std::size_t)>& body) {
    if (n == 0) return;
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n)));
    if (workers == 1) {
        body(0, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&body, begin, end] { body(begin, end); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace scarlab
