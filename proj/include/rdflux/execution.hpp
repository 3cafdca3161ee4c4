// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <exception>
#include <span>
#include <vector>

namespace rdflux {

/// Selects between the OpenMP kernels and the strictly sequential reference
/// path. Both paths produce bitwise identical results: loops write disjoint
/// outputs and every reduction is split into fixed-size blocks that are
/// combined in index order.
enum class Execution { Sequential, Parallel };

inline constexpr std::size_t kReductionBlock = 2048;

/// Runs body(i) for i in [0, n). Iterations must write disjoint data. If
/// iterations throw, the exception of the lowest index is rethrown after the
/// loop, matching what the sequential path reports.
template <class Body>
void parallel_for(Execution exec, std::size_t n, Body&& body) {
  const auto count = static_cast<long long>(n);
  if (exec == Execution::Parallel) {
    std::exception_ptr error;
    long long error_index = count;
#pragma omp parallel for schedule(dynamic, 64)
    for (long long i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(rdflux_parallel_for_error)
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
    if (error) std::rethrow_exception(error);
  } else {
    for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
  }
}

/// Deterministic sum of term(i) over [0, n): per-block partial sums are
/// computed (possibly in parallel) and then added in block order.
template <class Term>
double blocked_sum(Execution exec, std::size_t n, Term&& term) {
  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  if (blocks <= 1) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += term(i);
    return s;
  }
  std::vector<double> partial(blocks, 0.0);
  parallel_for(exec, blocks, [&](std::size_t b) {
    const std::size_t lo = b * kReductionBlock;
    const std::size_t hi = lo + kReductionBlock < n ? lo + kReductionBlock : n;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[b] = s;
  });
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

inline double dot(Execution exec, std::span<const double> a, std::span<const double> b) {
  return blocked_sum(exec, a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

}  // namespace rdflux
