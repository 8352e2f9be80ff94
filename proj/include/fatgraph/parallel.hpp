#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <type_traits>
#include <vector>

namespace fatgraph {

/// Exhaustive sweeps refuse to visit more than this many cells (16^6).
inline constexpr std::uint64_t kDefaultExhaustiveLimit = std::uint64_t{1} << 24;

struct SweepOptions {
    unsigned workers = 1;
    std::uint64_t exhaustive_limit = kDefaultExhaustiveLimit;
};

/// Splits [0, n) into `workers` contiguous chunks, runs fn(begin, end) on
/// each and returns the results in chunk order, so any reduction over them
/// is independent of the worker count as long as it is order-aware.
template <class Fn>
auto run_chunks(std::uint64_t n, unsigned workers, Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, std::uint64_t, std::uint64_t>> {
    using Result = std::invoke_result_t<Fn&, std::uint64_t, std::uint64_t>;
    std::uint64_t chunks = std::max<std::uint64_t>(1, std::min<std::uint64_t>(workers, n));
    std::vector<Result> results(chunks);
    auto bounds = [&](std::uint64_t c) { return n * c / chunks; };

    if (chunks == 1) {
        results[0] = fn(0, n);
        return results;
    }

    std::vector<std::exception_ptr> errors(chunks);
    std::vector<std::thread> threads;
    threads.reserve(chunks);
    for (std::uint64_t c = 0; c < chunks; ++c) {
        threads.emplace_back([&, c] {
            try {
                results[c] = fn(bounds(c), bounds(c + 1));
            } catch (...) {
                errors[c] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

} // namespace fatgraph
