#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace caplab {

/// Worker count, read once from CAPLAB_THREADS (default: hardware concurrency).
int thread_count();

/// Overrides the worker count for the rest of the process (tests, CLI flag).
void set_thread_count(int n);

/// Calls body(begin, end) over a fixed partition of [0, n). Partition
/// boundaries depend only on n, never on the worker count, so any per-chunk
/// accumulation combined in chunk order is reproducible bit for bit.
void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t)>& body);

/// Element-wise loop; body(i) must only write state owned by index i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Deterministic sum of term(i) over [0, n).
double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& term);

}  // namespace caplab
