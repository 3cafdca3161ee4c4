// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rdflux/estimator.hpp"
#include "rdflux/execution.hpp"
#include "rdflux/mesh.hpp"
#include "rdflux/sparse.hpp"

#include <array>
#include <chrono>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rdflux {

/// Solution of -u'' + kappa^2 u = kappa1^2 on (-1, 1) with u(+-1) = 0,
/// kappa = kappa1 for x < 0 and kappa2 for x > 0, C^1 at x = 0. On each half
/// it is written with exponentials that decay away from x = -1, 0, 1, so no
/// term overflows for large kappa and none cancels catastrophically for
/// small kappa.
class ExactBenchmarkSolution {
 public:
  ExactBenchmarkSolution(double kappa1, double kappa2);

  double kappa1() const { return k1_; }
  double kappa2() const { return k2_; }
  double value(double x) const;
  double derivative(double x) const;
  /// int_{-1}^{1} u.
  double integral() const;
  /// |||u|||^2 = F(u) = kappa1^2 |cross-section| int u on (-1,1)^dim.
  double energy_sq(int dim) const;
  /// Coefficients of u = A1 e^{-k1 x} + A2 e^{k1 x} + 1 (x < 0) and
  /// A3 e^{-k2 x} + A4 e^{k2 x} + k1^2/k2^2 (x > 0); entries may under- or
  /// overflow for large kappa.
  std::array<double, 4> coefficients() const;

  ExactSolution as_field(int dim) const;

 private:
  double k1_, k2_, c_;
  double b2_ = 0.0, b4_ = 0.0;  // weights of the homogeneous parts
};

struct RunConfig {
  int dim = 3;
  int M = 16;
  double kappa1 = 1.0;
  double kappa2 = 1e6;
  Strategy strategy = Strategy::Both;
  SolverOptions solver;
  Execution exec = Execution::Parallel;
  int oscillation_degree = 8;
  bool timing = true;
  /// Quadrature route of the true error as a cross-check (expensive).
  bool quadrature_true_error = false;
  int true_error_subdivision = 4;
};

/// One CSV row plus the audit figures behind it.
struct BenchmarkRow {
  int dim = 0;
  int M = 0;
  std::size_t ndof = 0;
  double kappa1 = 0.0, kappa2 = 0.0;
  double true_error = 0.0;
  std::optional<double> eta_tau, eta_taustar;
  double osc_f = 0.0, osc_gn = 0.0;
  std::size_t solver_iters = 0;
  double runtime_ms = 0.0;
  ErrorReport report;
  std::optional<double> true_error_quadrature;
  std::vector<PatchReport> patches;

  std::optional<double> ieff_tau() const;
  std::optional<double> ieff_taustar() const;
};

inline constexpr double kConformityTolerance = 1e-11;

Mesh benchmark_cube_mesh(int dim, int M, double kappa1, double kappa2);

/// Validates the configuration, builds the mesh, solves, equilibrates,
/// estimates and measures the true error. Throws ConfigError for odd or
/// non-positive M, non-positive kappa or kappa1 > kappa2, and
/// ConformityAuditFailed when the normal-trace mismatch exceeds 1e-11.
BenchmarkRow run_benchmark(const RunConfig& config);

/// Same pipeline on an arbitrary mesh and data; M and the kappa columns are
/// left unset (0 / nan) and the true error is nan without `exact`.
BenchmarkRow run_problem(const Mesh& mesh, const ProblemData& data, const RunConfig& config,
                         const ExactSolution* exact = nullptr,
                         std::optional<std::chrono::steady_clock::time_point> start = std::nullopt);

/// Each row is written to `csv` (when given) and flushed as soon as it is
/// computed, so a failure keeps the finished rows.
std::vector<BenchmarkRow> sweep_kappa(const RunConfig& config, const std::vector<double>& kappa1_values,
                                      std::ostream* csv = nullptr);
std::vector<BenchmarkRow> sweep_mesh(const RunConfig& config, const std::vector<int>& M_values,
                                     std::ostream* csv = nullptr);

inline const std::vector<double> kDefaultKappaSweep = {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6};
inline const std::vector<int> kDefaultMeshSweep = {2, 4, 8, 16, 32};

inline constexpr const char* kCsvHeader =
    "d,M,ndof,kappa1,kappa2,true_error,eta_tau,eta_taustar,osc_f,osc_gn,ieff_tau,ieff_taustar,solver_iters,"
    "runtime_ms";

std::string csv_row(const BenchmarkRow& row);

}  // namespace rdflux
