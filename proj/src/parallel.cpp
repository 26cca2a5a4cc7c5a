#include "reclab/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace reclab {

namespace {

std::atomic<std::size_t> requested_threads{1};

// Nested parallel_for calls run inline on the calling worker.
thread_local bool inside_worker = false;

std::size_t env_threads() {
    const char* raw = std::getenv("RECOVERY_LAB_THREADS");
    if (raw == nullptr) {
        return 0;
    }
    try {
        const long v = std::stol(raw);
        return v > 0 ? static_cast<std::size_t>(v) : 0;
    } catch (const std::exception&) {
        return 0;
    }
}

} // namespace

void set_thread_count(std::size_t n) { requested_threads = n == 0 ? 1 : n; }

std::size_t thread_count() {
    const std::size_t env = env_threads();
    return env > 0 ? env : requested_threads.load();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min(thread_count(), n);
    if (workers <= 1 || inside_worker) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        inside_worker = true;
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next = n;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back(run);
    }
    pool.clear();
    if (failure) {
        std::rethrow_exception(failure);
    }
}

double pairwise_sum(const double* data, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += data[i];
        }
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

} // namespace reclab
