#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace concap {

// Outcome of one item in a parallel map: a value or the exception it raised.
template <typename T>
struct Outcome {
    std::optional<T> value;
    std::exception_ptr error;

    bool ok() const { return value.has_value(); }
};

// Applies fn to every index in [0, n) on up to `workers` threads. Results land
// in index order, so the output never depends on scheduling.
template <typename Fn>
auto parallel_map(std::size_t n, std::size_t workers, Fn&& fn) -> std::vector<Outcome<decltype(fn(std::size_t{}))>> {
    using T = decltype(fn(std::size_t{}));
    std::vector<Outcome<T>> out(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                out[i].value.emplace(fn(i));
            } catch (...) {
                out[i].error = std::current_exception();
            }
        }
    };
    std::size_t threads = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
    if (threads == 1) {
        worker();
        return out;
    }
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    pool.clear();  // joins
    return out;
}

}  // namespace concap
