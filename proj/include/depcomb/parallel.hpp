#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace depcomb {

// Static-chunked parallel loop over [0, n). fn must be safe to call
// concurrently for distinct indices; results must not depend on order.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const int nt = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nt));
    for (int t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = static_cast<std::size_t>(t); i < n;
                 i += static_cast<std::size_t>(nt))
                fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace depcomb
