#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace equiperm {

/// Resolve a worker count: 0 means hardware concurrency.
inline int effective_threads(int requested = 0) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Run fn(begin, end) over [0, count) split into contiguous chunks.
/// Work items must be independent; results must not depend on the split
/// (callers key RNG streams by item index), so any thread count gives
/// output identical to a serial run.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    if (count == 0) return;
    auto workers = std::min<std::size_t>(static_cast<std::size_t>(effective_threads(threads)), count);
    if (workers <= 1) {
        fn(std::size_t{0}, count);
        return;
    }
    std::size_t chunk = (count + workers - 1) / workers;
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t begin = w * chunk;
        std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end, w, &errors] {
            try {
                fn(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace equiperm
