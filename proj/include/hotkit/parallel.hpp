#pragma once

// Thread control and reductions whose floating-point result does not depend
// on the number of OpenMP threads.

#include <array>
#include <cstddef>
#include <vector>

namespace hotkit {

/// Sets the OpenMP thread count for subsequent kernels. 0 restores the
/// runtime default (hardware concurrency or OMP_NUM_THREADS).
void set_num_threads(int threads);
int num_threads();

/// Reduction blocks have a fixed size so partial sums are formed over the
/// same index ranges no matter how blocks are scheduled.
inline constexpr std::size_t kReduceBlock = 4096;

/// Sum of term(i) for i in [0, n). Each block is summed serially, blocks are
/// processed in parallel, then block partials are added in block order.
template <typename Term>
double ordered_sum(std::size_t n, Term&& term) {
  const std::size_t blocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
    const std::size_t hi = lo + kReduceBlock < n ? lo + kReduceBlock : n;
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += term(i);
    partial[static_cast<std::size_t>(b)] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

/// Vector-valued variant: visit(i, acc) adds the contribution of element i
/// into a block-local accumulator of N slots.
template <std::size_t N, typename Visit>
std::array<double, N> ordered_sum_array(std::size_t n, Visit&& visit) {
  const std::size_t blocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<std::array<double, N>> partial(blocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
    const std::size_t hi = lo + kReduceBlock < n ? lo + kReduceBlock : n;
    std::array<double, N> acc{};
    for (std::size_t i = lo; i < hi; ++i) visit(i, acc);
    partial[static_cast<std::size_t>(b)] = acc;
  }
  std::array<double, N> total{};
  for (const auto& p : partial)
    for (std::size_t k = 0; k < N; ++k) total[k] += p[k];
  return total;
}

}  // namespace hotkit
