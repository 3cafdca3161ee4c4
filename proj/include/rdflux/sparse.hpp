// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rdflux/execution.hpp"
#include "rdflux/types.hpp"

#include <span>
#include <vector>

namespace rdflux {

/// Compressed sparse row matrix; column indices are sorted within each row.
struct CsrMatrix {
  std::size_t rows = 0;
  std::vector<int> offsets{0};
  std::vector<int> cols;
  std::vector<double> values;

  void multiply(Execution exec, std::span<const double> x, std::span<double> y) const;
  double at(int i, int j) const;
  double diagonal(int i) const { return at(i, i); }
  /// Index into `values` of entry (i, j); -1 if not in the pattern.
  int find(int i, int j) const;
  std::size_t nonzeros() const { return cols.size(); }
};

CsrMatrix identity_matrix(std::size_t n);
CsrMatrix from_dense(const Eigen::MatrixXd& dense);

struct SolverOptions {
  double tolerance = 1e-12;         // relative residual ||b - Ax|| / ||b||
  std::size_t max_iterations = 0;   // 0 means 10 * n
  std::size_t dense_threshold = 200;
  Execution exec = Execution::Sequential;
};

struct SolveResult {
  std::vector<double> x;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  bool dense = false;
};

/// Solves an SPD system with Jacobi-preconditioned conjugate gradients, or a
/// dense Cholesky factorisation when n < dense_threshold. Throws NotSpd for a
/// nonpositive diagonal, a failed Cholesky pivot or a nonpositive curvature
/// in CG, and NoConvergence when the iteration budget runs out.
SolveResult solve_spd(const CsrMatrix& A, std::span<const double> b, const SolverOptions& options = {});

}  // namespace rdflux
