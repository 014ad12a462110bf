#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace evt {

// Runs fn(i) for i in [0, n) across a small thread pool. Work items must
// write only to their own index of any shared output so that the result is
// independent of scheduling. The first exception thrown by any item is
// rethrown on the calling thread.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         unsigned n_threads = 0) {
    if (n == 0) {
        return;
    }
    unsigned hw = n_threads ? n_threads : std::thread::hardware_concurrency();
    if (hw < 1) {
        hw = 1;
    }
    if (hw > n) {
        hw = static_cast<unsigned>(n);
    }
    if (hw == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }

    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(hw);
    std::atomic<std::size_t> next{0};
    for (unsigned t = 0; t < hw; ++t) {
        workers.emplace_back([&, t] {
            try {
                for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                    fn(i);
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) {
        w.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

} // namespace evt
