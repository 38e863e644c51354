#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace ntkx::parallel {

/// Worker count used by parallel_for. 1 by default; results never depend on it.
void set_threads(std::size_t n);
std::size_t threads();

/// Runs body(i) for i in [0, n). Iterations must write disjoint outputs.
/// Nested calls from inside a worker run serially.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Summation with a fixed schedule: contiguous chunks of kChunk terms are
/// summed left to right, then the chunk partials are summed left to right.
/// The result depends only on the input, never on the thread count.
inline constexpr std::size_t kChunk = 4096;
double deterministic_sum(std::span<const double> terms);

}  // namespace ntkx::parallel
