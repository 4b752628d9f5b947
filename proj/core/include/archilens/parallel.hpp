#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace archilens {

/// Outcome of one item in a parallel batch: either a value or the captured
/// exception (with its message, for failure accounting).
template <typename T>
struct Attempt {
    std::optional<T> value;
    std::exception_ptr error;
    std::string message;

    bool ok() const { return value.has_value(); }
};

/// Apply fn to every input with at most max_inflight worker threads.
/// Results land in input order regardless of completion order; exceptions
/// are captured per slot rather than thrown.
template <typename In, typename Fn>
auto parallel_try_map(const std::vector<In>& inputs, std::size_t max_inflight, Fn&& fn)
    -> std::vector<Attempt<decltype(fn(inputs.front()))>> {
    using Out = decltype(fn(inputs.front()));
    std::vector<Attempt<Out>> results(inputs.size());
    if (inputs.empty()) return results;
    if (max_inflight < 1) max_inflight = 1;

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= inputs.size()) return;
            try {
                results[i].value = fn(inputs[i]);
            } catch (const std::exception& e) {
                results[i].error = std::current_exception();
                results[i].message = e.what();
            } catch (...) {
                results[i].error = std::current_exception();
                results[i].message = "unknown error";
            }
        }
    };

    const std::size_t workers = std::min(max_inflight, inputs.size());
    if (workers <= 1) {
        worker();
        return results;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return results;
}

/// As parallel_try_map, but rethrows the first failure (by input order).
template <typename In, typename Fn>
auto parallel_map(const std::vector<In>& inputs, std::size_t max_inflight, Fn&& fn)
    -> std::vector<decltype(fn(inputs.front()))> {
    auto attempts = parallel_try_map(inputs, max_inflight, std::forward<Fn>(fn));
    std::vector<decltype(fn(inputs.front()))> out;
    out.reserve(attempts.size());
    for (auto& attempt : attempts) {
        if (!attempt.ok()) std::rethrow_exception(attempt.error);
        out.push_back(std::move(*attempt.value));
    }
    return out;
}

}  // namespace archilens
