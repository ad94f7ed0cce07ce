#ifndef ZINB_PARALLEL_HPP
#define ZINB_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace zinb {

/// Worker count: explicit request, else ZINB_THREADS, else hardware concurrency.
inline unsigned resolve_thread_count(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("ZINB_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (...) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/**
 * Calls fn(i) for i in [0, count) on up to `threads` workers. Tasks must not
 * share mutable state. The first exception (lowest task index) is rethrown.
 */
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    std::vector<std::exception_ptr> errors(count);
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_thread_count(threads), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace zinb

#endif
