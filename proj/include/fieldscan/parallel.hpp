#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace fieldscan {

/// Process cap for worker threads. 0 means hardware concurrency.
/// Results never depend on this value: work units write to disjoint slots
/// and reductions combine partials in a fixed unit order.
inline std::atomic<unsigned>& max_threads_slot() {
    static std::atomic<unsigned> n{0};
    return n;
}

inline void set_max_threads(unsigned n) { max_threads_slot().store(n); }

inline unsigned effective_threads(std::size_t n_units) {
    unsigned cap = max_threads_slot().load();
    if (cap == 0) cap = std::thread::hardware_concurrency();
    if (cap == 0) cap = 1;
    if (n_units < cap) cap = static_cast<unsigned>(n_units);
    return cap > 0 ? cap : 1;
}

/// Runs fn(unit) for unit in [0, n_units) on up to the capped number of
/// threads. Units are claimed from an atomic counter; the first exception
/// thrown by any unit is rethrown on the caller's thread.
inline void parallel_units(std::size_t n_units, const std::function<void(std::size_t)>& fn) {
    if (n_units == 0) return;
    const unsigned workers = effective_threads(n_units);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n_units; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_units || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace fieldscan
