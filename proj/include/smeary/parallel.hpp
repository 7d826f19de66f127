#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace smeary {

inline constexpr const char* kThreadsEnv = "SMEARY_THREADS";

/// Worker count from SMEARY_THREADS, else 1.
inline int default_thread_count() {
    if (const char* env = std::getenv(kThreadsEnv)) {
        try {
            const int n = std::stoi(env);
            if (n > 0) {
                return n;
            }
        } catch (...) {
        }
    }
    return 1;
}

/// Runs body(i) for i in [0, count) on `threads` workers. Work is handed out
/// by index, so results written to slot i do not depend on scheduling. The
/// first exception thrown by any task is rethrown after all workers stop.
template <class Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
    threads = std::max(1, std::min<int>(threads, static_cast<int>(count)));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) {
                return;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                next.store(count);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    for (auto& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

}  // namespace smeary
