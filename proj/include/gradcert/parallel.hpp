#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace gradcert {

/// Worker cap: hardware concurrency, clamped by env GRADCERT_THREADS.
inline int max_threads() {
    static const int cached = [] {
        const unsigned hw = std::thread::hardware_concurrency();
        int n = hw ? static_cast<int>(hw) : 1;
        if (const char* env = std::getenv("GRADCERT_THREADS")) {
            const int cap = std::atoi(env);
            if (cap >= 1 && cap < n) n = cap;
        }
        return n;
    }();
    return cached;
}

/// Index-parallel loop. fn(i) must only write to state owned by index i;
/// results are then independent of scheduling.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn, std::size_t grain = 128) {
    const int workers = max_threads();
    if (workers <= 1 || count <= grain) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        while (true) {
            const std::size_t start = next.fetch_add(grain);
            if (start >= count) break;
            const std::size_t end = std::min(count, start + grain);
            for (std::size_t i = start; i < end; ++i) fn(i);
        }
    };
    std::vector<std::thread> pool;
    const int extra = std::min<int>(workers - 1, static_cast<int>((count + grain - 1) / grain) - 1);
    pool.reserve(extra > 0 ? extra : 0);
    for (int t = 0; t < extra; ++t) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
}

} // namespace gradcert
