#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace cpsem::experiments {

/// Runs fn(0..n-1) on up to `jobs` threads. Task i's exception, if any, is
/// stored in the returned vector at position i; the other tasks still run.
template <class Fn>
std::vector<std::exception_ptr> parallel_for(std::size_t n, int jobs, Fn&& fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto threads = static_cast<std::size_t>(std::max(1, jobs));
    if (threads == 1 || n <= 1) {
        worker();
        return errors;
    }
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < std::min(threads, n); ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return errors;
}

}  // namespace cpsem::experiments
