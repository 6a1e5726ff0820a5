#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace labavs::detail {

/// Runs body(i) for i in [0, count). Each index must write only its own
/// output slot; the lowest-index exception is rethrown after all workers join.
template <class Body>
void parallel_for(std::size_t count, Body&& body, std::size_t min_per_thread = 16) {
    const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    const std::size_t workers = std::min(hw, std::max<std::size_t>(1, count / min_per_thread));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::size_t> error_index(workers, count);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t t = 0; t < workers; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t i = t; i < count; i += workers) {
                    try {
                        body(i);
                    } catch (...) {
                        errors[t] = std::current_exception();
                        error_index[t] = i;
                        return;
                    }
                }
            });
        }
    }
    std::size_t first = workers;
    for (std::size_t t = 0; t < workers; ++t) {
        if (errors[t] && (first == workers || error_index[t] < error_index[first])) first = t;
    }
    if (first != workers) std::rethrow_exception(errors[first]);
}

}  // namespace labavs::detail
