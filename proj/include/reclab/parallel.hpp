#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace reclab {

/// Worker count used by parallel_for. RECOVERY_LAB_THREADS, when set to a
/// positive integer, overrides the value passed to set_thread_count.
void set_thread_count(std::size_t n);
std::size_t thread_count();

/// Runs body(i) for i in [0, n). Iterations must be independent; callers
/// write into slot i of a preallocated result and reduce in index order, so
/// results never depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// parallel_for that collects one value per index.
template <class T, class F> std::vector<T> parallel_map(std::size_t n, F&& f) {
    std::vector<T> out(n);
    parallel_for(n, [&](std::size_t i) { out[i] = f(i); });
    return out;
}

/// Pairwise (cascade) summation over a fixed index order.
double pairwise_sum(const double* data, std::size_t n);

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

} // namespace reclab
