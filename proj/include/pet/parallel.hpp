#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace pet {

/// Splits [0, count) into contiguous blocks and runs fn(begin, end) on each,
/// possibly on worker threads. Callers must write only to disjoint output
/// regions; the block decomposition itself never influences results.
template <typename F>
void parallel_blocks(int count, int n_threads, F&& fn) {
    if (count <= 0) return;
    n_threads = std::max(1, n_threads);
    if (n_threads == 1 || count == 1) {
        fn(0, count);
        return;
    }
    int blocks = std::min(n_threads, count);
    std::vector<std::thread> workers;
    workers.reserve(blocks);
    int base = count / blocks;
    int extra = count % blocks;
    int begin = 0;
    for (int b = 0; b < blocks; ++b) {
        int len = base + (b < extra ? 1 : 0);
        int end = begin + len;
        workers.emplace_back([&fn, begin, end] { fn(begin, end); });
        begin = end;
    }
    for (auto& w : workers) w.join();
}

}  // namespace pet
