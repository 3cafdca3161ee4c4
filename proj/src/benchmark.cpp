// SPDX-License-Identifier: Apache-2.0
#include "rdflux/benchmark.hpp"

#include "rdflux/equilibration.hpp"
#include "rdflux/fem.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

namespace rdflux {

namespace {

// 1 - (1 - e^{-k}) / k, with a series where the direct form cancels.
double layer_mean_deficit(double k) {
  if (k < 0.5) {
    double term = 1.0, sum = 0.0;
    for (int n = 1; n <= 20; ++n) {
      term *= -k / (n + 1);
      sum -= term;
    }
    return sum;
  }
  return 1.0 + std::expm1(-k) / k;
}

}  // namespace

ExactBenchmarkSolution::ExactBenchmarkSolution(double kappa1, double kappa2) : k1_(kappa1), k2_(kappa2) {
  if (!(k1_ > 0.0) || !(k2_ > 0.0) || !std::isfinite(k1_) || !std::isfinite(k2_))
    throw ConfigError("the benchmark solution needs finite kappa1, kappa2 > 0");
  c_ = (k1_ / k2_) * (k1_ / k2_);
  // Continuity of value and (scaled) derivative at x = 0.
  const double s = 1.0 / (k1_ + k2_);
  const double a11 = -std::expm1(-2.0 * k1_), a12 = std::expm1(-2.0 * k2_);
  const double a21 = s * k1_ * (1.0 + std::exp(-2.0 * k1_)), a22 = s * k2_ * (1.0 + std::exp(-2.0 * k2_));
  const double r1 = -c_ * std::expm1(-k2_) + std::expm1(-k1_);
  const double r2 = s * (-c_ * k2_ * std::exp(-k2_) - k1_ * std::exp(-k1_));
  const double det = a11 * a22 - a12 * a21;
  if (!(det > 0.0) || !std::isfinite(det)) throw SingularSystem("benchmark coefficient system is singular");
  b2_ = (r1 * a22 - a12 * r2) / det;
  b4_ = (a11 * r2 - a21 * r1) / det;
}

double ExactBenchmarkSolution::value(double x) const {
  if (x < 0.0) {
    const double phi1 = -std::expm1(-k1_ * (x + 1.0));
    const double phi2 = -std::exp(k1_ * x) * std::expm1(-2.0 * k1_ * (x + 1.0));
    return phi1 + b2_ * phi2;
  }
  const double psi1 = -c_ * std::expm1(-k2_ * (1.0 - x));
  const double psi2 = -std::exp(-k2_ * x) * std::expm1(-2.0 * k2_ * (1.0 - x));
  return psi1 + b4_ * psi2;
}

double ExactBenchmarkSolution::derivative(double x) const {
  if (x < 0.0) {
    const double dphi1 = k1_ * std::exp(-k1_ * (x + 1.0));
    const double dphi2 = k1_ * (std::exp(k1_ * x) + std::exp(-k1_ * (x + 2.0)));
    return dphi1 + b2_ * dphi2;
  }
  const double dpsi1 = -c_ * k2_ * std::exp(-k2_ * (1.0 - x));
  const double dpsi2 = -k2_ * (std::exp(-k2_ * x) + std::exp(k2_ * (x - 2.0)));
  return dpsi1 + b4_ * dpsi2;
}

double ExactBenchmarkSolution::integral() const {
  const double left = layer_mean_deficit(k1_) + b2_ * std::expm1(-k1_) * std::expm1(-k1_) / k1_;
  const double right = c_ * layer_mean_deficit(k2_) + b4_ * std::expm1(-k2_) * std::expm1(-k2_) / k2_;
  return left + right;
}

double ExactBenchmarkSolution::energy_sq(int dim) const {
  return k1_ * k1_ * std::ldexp(1.0, dim - 1) * integral();
}

std::array<double, 4> ExactBenchmarkSolution::coefficients() const {
  return {-std::exp(-k1_) - b2_ * std::exp(-2.0 * k1_), b2_, b4_, -c_ * std::exp(-k2_) - b4_ * std::exp(-2.0 * k2_)};
}

ExactSolution ExactBenchmarkSolution::as_field(int dim) const {
  ExactSolution out;
  const ExactBenchmarkSolution self = *this;
  out.value = [self](const Point& x) { return self.value(x[0]); };
  out.gradient = [self, dim](const Point& x) {
    Point g = Point::Zero(dim);
    g[0] = self.derivative(x[0]);
    return g;
  };
  out.energy_sq = energy_sq(dim);
  return out;
}

// ---------------------------------------------------------------------------

std::optional<double> BenchmarkRow::ieff_tau() const {
  if (!eta_tau || !(true_error > 0.0)) return std::nullopt;
  return *eta_tau / true_error;
}

std::optional<double> BenchmarkRow::ieff_taustar() const {
  if (!eta_taustar || !(true_error > 0.0)) return std::nullopt;
  return *eta_taustar / true_error;
}

Mesh benchmark_cube_mesh(int dim, int M, double kappa1, double kappa2) {
  return build_cube_mesh(M, dim, [=](const Point& c) { return c[0] < 0.0 ? kappa1 : kappa2; },
                         dirichlet_on_x1_faces());
}

BenchmarkRow run_benchmark(const RunConfig& config) {
  if (config.dim < 2 || config.dim > kMaxDim) throw ConfigError(fmt::format("unsupported dimension {}", config.dim));
  if (config.M < 2 || config.M % 2 != 0)
    throw ConfigError(fmt::format("M = {} must be even and positive so that x_1 = 0 is a mesh plane", config.M));
  if (!(config.kappa1 > 0.0) || !(config.kappa2 > 0.0)) throw ConfigError("kappa1 and kappa2 must be positive");
  if (config.kappa1 > config.kappa2) throw ConfigError("the benchmark expects kappa1 <= kappa2");

  const auto start = std::chrono::steady_clock::now();
  const Mesh mesh = benchmark_cube_mesh(config.dim, config.M, config.kappa1, config.kappa2);
  ProblemData data;
  const double f = config.kappa1 * config.kappa1;
  data.source = [f](const Point&) { return f; };
  data.data_degree = 2;
  const ExactSolution exact = ExactBenchmarkSolution(config.kappa1, config.kappa2).as_field(config.dim);
  BenchmarkRow row = run_problem(mesh, data, config, &exact, start);
  row.M = config.M;
  row.kappa1 = config.kappa1;
  row.kappa2 = config.kappa2;
  return row;
}

BenchmarkRow run_problem(const Mesh& mesh, const ProblemData& data, const RunConfig& config,
                         const ExactSolution* exact, std::optional<std::chrono::steady_clock::time_point> start) {
  const auto t0 = start.value_or(std::chrono::steady_clock::now());
  SolverOptions solver = config.solver;
  solver.exec = config.exec;
  const FemSolution uh = solve_fem(mesh, data, solver);
  const EquilibratedFluxes eq = equilibrate(mesh, uh, data, config.exec);
  EstimateOptions opts;
  opts.exec = config.exec;
  opts.oscillation_degree = config.oscillation_degree;
  ErrorReport report = estimate(mesh, uh, data, eq, config.strategy, opts);
  if (report.max_trace_mismatch > kConformityTolerance)
    throw ConformityAuditFailed(fmt::format("normal-trace mismatch {:.3e} exceeds {:.0e}", report.max_trace_mismatch,
                                            kConformityTolerance));
  if (exact) {
    const TrueError err = true_error(mesh, uh, data, *exact, config.true_error_subdivision, 10, config.exec,
                                     config.quadrature_true_error || !exact->energy_sq);
    report.true_error = err.reference();
    if (config.quadrature_true_error) report.true_error_quadrature = err.quadrature;
  }
  const auto stop = std::chrono::steady_clock::now();

  BenchmarkRow row;
  row.dim = mesh.dim();
  row.M = 0;
  row.ndof = mesh.num_free_vertices();
  row.kappa1 = std::numeric_limits<double>::quiet_NaN();
  row.kappa2 = std::numeric_limits<double>::quiet_NaN();
  row.true_error = report.true_error.value_or(std::numeric_limits<double>::quiet_NaN());
  row.true_error_quadrature = report.true_error_quadrature;
  row.eta_tau = report.eta_tau;
  row.eta_taustar = report.eta_taustar;
  row.osc_f = report.osc_f;
  row.osc_gn = report.osc_gn;
  row.solver_iters = uh.iterations;
  row.runtime_ms = config.timing ? std::chrono::duration<double, std::milli>(stop - t0).count() : 0.0;
  row.patches = eq.patches;
  row.report = std::move(report);
  return row;
}

namespace {

template <class Configs>
std::vector<BenchmarkRow> run_rows(const Configs& configs, std::ostream* csv) {
  std::vector<BenchmarkRow> rows;
  for (const RunConfig& c : configs) {
    rows.push_back(run_benchmark(c));
    if (csv) *csv << csv_row(rows.back()) << std::endl;
  }
  return rows;
}

}  // namespace

std::vector<BenchmarkRow> sweep_kappa(const RunConfig& config, const std::vector<double>& kappa1_values,
                                      std::ostream* csv) {
  if (kappa1_values.empty()) throw ConfigError("empty kappa1 sweep");
  std::vector<RunConfig> configs;
  for (double k : kappa1_values) {
    RunConfig c = config;
    c.kappa1 = k;
    configs.push_back(c);
  }
  return run_rows(configs, csv);
}

std::vector<BenchmarkRow> sweep_mesh(const RunConfig& config, const std::vector<int>& M_values, std::ostream* csv) {
  if (M_values.empty()) throw ConfigError("empty mesh sweep");
  std::vector<RunConfig> configs;
  for (int m : M_values) {
    RunConfig c = config;
    c.M = m;
    configs.push_back(c);
  }
  return run_rows(configs, csv);
}

std::string csv_row(const BenchmarkRow& row) {
  auto num = [](double v) { return std::isnan(v) ? std::string("nan") : fmt::format("{:.15g}", v); };
  auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : std::string("nan"); };
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}", row.dim, row.M, row.ndof, num(row.kappa1),
                     num(row.kappa2), num(row.true_error), opt(row.eta_tau), opt(row.eta_taustar), num(row.osc_f),
                     num(row.osc_gn), opt(row.ieff_tau()), opt(row.ieff_taustar()), row.solver_iters,
                     fmt::format("{:.3f}", row.runtime_ms));
}

}  // namespace rdflux
