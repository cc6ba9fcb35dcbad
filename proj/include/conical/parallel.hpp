#pragma once

#include <cstddef>
#include <functional>

namespace conical {

/// Number of worker threads used by parallel loops. Initialized from
/// CONICAL_GMT_THREADS, falling back to hardware concurrency.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs body(i) for i in [0, count). Each index is handled by exactly one
/// thread, so bodies that only write slot i give deterministic results.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Pairwise summation; the fixed split order makes results independent of how
/// the summands were produced.
double pairwise_sum(const double* values, std::size_t count);

}  // namespace conical
