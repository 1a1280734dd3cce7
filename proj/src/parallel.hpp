#pragma once

// Block-parallel loop shared by the Monte Carlo drivers.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qoe::detail {

inline unsigned worker_count(unsigned requested, std::uint64_t blocks) {
    unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::uint64_t>(n, std::max<std::uint64_t>(blocks, 1)));
}

// Runs body(block_index) for every block on a small pool. Blocks are the unit
// of reduction, so the caller combines per-block results in index order.
// The first exception thrown by any block is rethrown on the calling thread.
template <class Body>
void for_each_block(std::uint64_t blocks, unsigned threads, Body&& body) {
    const unsigned workers = worker_count(threads, blocks);
    if (workers <= 1) {
        for (std::uint64_t b = 0; b < blocks; ++b) body(b);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            try {
                for (std::uint64_t b = next.fetch_add(1); b < blocks; b = next.fetch_add(1)) body(b);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(blocks);
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace qoe::detail
