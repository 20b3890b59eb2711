#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace fraclab {

namespace detail {
inline std::atomic<unsigned>& thread_setting() {
    static std::atomic<unsigned> n{1};
    return n;
}
}  // namespace detail

inline void set_threads(unsigned n) { detail::thread_setting() = std::max(1u, n); }
inline unsigned threads() { return detail::thread_setting(); }

namespace detail {

// Runs body(i) for i in [0, n). Work is split into contiguous chunks per
// thread; callers write into slot i and reduce afterwards in index order, so
// the result never depends on the thread count.
template <class F>
void parallel_for(std::size_t n, F&& body) {
    unsigned nt = std::min<std::size_t>(threads(), n);
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nt);
    for (unsigned w = 0; w < nt; ++w) {
        pool.emplace_back([&, w] {
            std::size_t lo = n * w / nt, hi = n * (w + 1) / nt;
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace detail
}  // namespace fraclab
