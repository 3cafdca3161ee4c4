// SPDX-License-Identifier: Apache-2.0
#include "rdflux/sparse.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace rdflux {

void CsrMatrix::multiply(Execution exec, std::span<const double> x, std::span<double> y) const {
  parallel_for(exec, rows, [&](std::size_t i) {
    double s = 0.0;
    for (int k = offsets[i]; k < offsets[i + 1]; ++k) s += values[k] * x[cols[k]];
    y[i] = s;
  });
}

int CsrMatrix::find(int i, int j) const {
  const auto first = cols.begin() + offsets[i];
  const auto last = cols.begin() + offsets[i + 1];
  const auto it = std::lower_bound(first, last, j);
  return (it != last && *it == j) ? static_cast<int>(it - cols.begin()) : -1;
}

double CsrMatrix::at(int i, int j) const {
  const int k = find(i, j);
  return k < 0 ? 0.0 : values[k];
}

CsrMatrix identity_matrix(std::size_t n) {
  CsrMatrix m;
  m.rows = n;
  for (std::size_t i = 0; i < n; ++i) {
    m.cols.push_back(static_cast<int>(i));
    m.values.push_back(1.0);
    m.offsets.push_back(static_cast<int>(i + 1));
  }
  return m;
}

CsrMatrix from_dense(const Eigen::MatrixXd& dense) {
  CsrMatrix m;
  m.rows = static_cast<std::size_t>(dense.rows());
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    for (Eigen::Index j = 0; j < dense.cols(); ++j)
      if (dense(i, j) != 0.0) {
        m.cols.push_back(static_cast<int>(j));
        m.values.push_back(dense(i, j));
      }
    m.offsets.push_back(static_cast<int>(m.cols.size()));
  }
  return m;
}

namespace {

double residual_norm(const CsrMatrix& A, std::span<const double> b, std::span<const double> x, Execution exec) {
  std::vector<double> r(A.rows);
  A.multiply(exec, x, r);
  for (std::size_t i = 0; i < A.rows; ++i) r[i] = b[i] - r[i];
  return std::sqrt(dot(exec, r, r));
}

SolveResult solve_dense(const CsrMatrix& A, std::span<const double> b, Execution exec) {
  const auto n = static_cast<Eigen::Index>(A.rows);
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int k = A.offsets[i]; k < A.offsets[i + 1]; ++k) dense(i, A.cols[k]) = A.values[k];
  Eigen::LLT<Eigen::MatrixXd> llt(dense);
  if (llt.info() != Eigen::Success) throw NotSpd("Cholesky factorisation failed: matrix not SPD");
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), n);
  const Eigen::VectorXd sol = llt.solve(rhs);
  SolveResult result;
  result.x.assign(sol.data(), sol.data() + n);
  result.dense = true;
  const double bnorm = rhs.norm();
  result.relative_residual = bnorm > 0 ? residual_norm(A, b, result.x, exec) / bnorm : 0.0;
  return result;
}

}  // namespace

SolveResult solve_spd(const CsrMatrix& A, std::span<const double> b, const SolverOptions& options) {
  const std::size_t n = A.rows;
  const Execution exec = options.exec;
  std::vector<double> inv_diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = A.diagonal(static_cast<int>(i));
    if (!(d > 0.0)) throw NotSpd(fmt::format("nonpositive diagonal entry {} at row {}", d, i));
    inv_diag[i] = 1.0 / d;
  }
  if (n < options.dense_threshold) return solve_dense(A, b, exec);

  SolveResult result;
  result.x.assign(n, 0.0);
  const double bnorm = std::sqrt(dot(exec, b, b));
  if (bnorm == 0.0) return result;

  std::vector<double> r(b.begin(), b.end()), z(n), p(n), q(n);
  parallel_for(exec, n, [&](std::size_t i) { z[i] = inv_diag[i] * r[i]; });
  p = z;
  double rz = dot(exec, r, z);
  const std::size_t max_it = options.max_iterations ? options.max_iterations : 10 * n;
  double rnorm = bnorm;
  std::size_t it = 0;
  while (rnorm > options.tolerance * bnorm) {
    if (it == max_it)
      throw NoConvergence(fmt::format("PCG did not converge in {} iterations (relative residual {:.3e})",
                                      max_it, rnorm / bnorm));
    A.multiply(exec, p, q);
    const double pq = dot(exec, p, q);
    if (!(pq > 0.0)) throw NotSpd("nonpositive curvature in PCG: matrix not SPD");
    const double alpha = rz / pq;
    parallel_for(exec, n, [&](std::size_t i) {
      result.x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
      z[i] = inv_diag[i] * r[i];
    });
    const double rz_new = dot(exec, r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    parallel_for(exec, n, [&](std::size_t i) { p[i] = z[i] + beta * p[i]; });
    rnorm = std::sqrt(dot(exec, r, r));
    ++it;
    // Guard against drift of the recursive residual near the tolerance.
    if (rnorm <= options.tolerance * bnorm) {
      rnorm = residual_norm(A, b, result.x, exec);
      if (rnorm > options.tolerance * bnorm) {
        A.multiply(exec, result.x, q);
        parallel_for(exec, n, [&](std::size_t i) {
          r[i] = b[i] - q[i];
          z[i] = inv_diag[i] * r[i];
          p[i] = z[i];
        });
        rz = dot(exec, r, z);
      }
    }
  }
  result.iterations = it;
  result.relative_residual = rnorm / bnorm;
  return result;
}

}  // namespace rdflux
