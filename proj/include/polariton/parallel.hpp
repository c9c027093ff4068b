#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <span>
#include <thread>
#include <vector>

namespace polariton {

// Worker count: explicit request, then POLARITON_LAB_THREADS, then hardware.
int resolve_threads(int requested = 0);

// Calls fn(i) for i in [0, n). Indices are split into contiguous blocks, so a
// result written to slot i never depends on the worker count.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn)
{
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t used = std::min(workers, n);
    std::vector<std::exception_ptr> errors(used);
    std::vector<std::jthread> pool;
    pool.reserve(used);
    for (std::size_t w = 0; w < used; ++w) {
        pool.emplace_back([&, w] {
            const std::size_t lo = n * w / used, hi = n * (w + 1) / used;
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    pool.clear();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

double pairwise_sum(std::span<const double> values);

}  // namespace polariton
