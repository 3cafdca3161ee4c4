// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"
#include "rdflux/benchmark.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>

using namespace rdflux;

namespace {

// Direct 4x4 solve for A1..A4: u(-1) = u(1) = 0 and C^1 at x = 0.
std::array<double, 4> naive_coefficients(double k1, double k2) {
  const double c = k1 * k1 / (k2 * k2);
  Eigen::Matrix4d A;
  Eigen::Vector4d b;
  A << std::exp(k1), std::exp(-k1), 0, 0,  //
      0, 0, std::exp(-k2), std::exp(k2),   //
      1, 1, -1, -1,                        //
      -k1, k1, k2, -k2;
  b << -1, -c, c - 1, 0;
  const Eigen::Vector4d x = A.fullPivLu().solve(b);
  return {x[0], x[1], x[2], x[3]};
}

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

RunConfig small_config(int dim, int M, double k1, double k2) {
  RunConfig c;
  c.dim = dim;
  c.M = M;
  c.kappa1 = k1;
  c.kappa2 = k2;
  c.exec = Execution::Sequential;
  c.timing = false;
  return c;
}

}  // namespace

TEST_CASE("exact solution coefficients") {
  for (auto [k1, k2] : {std::pair{0.5, 2.0}, {1.0, 1.0}, {1.0, 10.0}, {3.0, 7.0}, {0.1, 0.3}}) {
    const auto a = ExactBenchmarkSolution(k1, k2).coefficients();
    const auto ref = naive_coefficients(k1, k2);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(a[i] - ref[i]) <= 1e-12 * std::max(1.0, std::abs(ref[i])));
  }
  // Equal kappa: u = 1 - cosh(kx)/cosh(k).
  for (double k : {0.01, 1.0, 5.0}) {
    const auto a = ExactBenchmarkSolution(k, k).coefficients();
    for (double ai : a) CHECK(ai == doctest::Approx(-1.0 / (std::exp(k) + std::exp(-k))).epsilon(1e-13));
    const ExactBenchmarkSolution u(k, k);
    for (double x : {-0.7, -0.1, 0.0, 0.4, 0.9}) CHECK(u.value(x) == doctest::Approx(1 - std::cosh(k * x) / std::cosh(k)));
  }
}

TEST_CASE("exact solution residuals") {
  for (auto [k1, k2] : {std::pair{1e-3, 1e6}, {1.0, 1e6}, {1e2, 1e6}, {1e4, 1e6}, {1e6, 1e6}, {2.0, 5.0}}) {
    const ExactBenchmarkSolution u(k1, k2);
    CHECK(std::abs(u.value(-1.0)) <= 1e-10);
    CHECK(std::abs(u.value(1.0)) <= 1e-10);
    const double left = u.value(-1e-300), right = u.value(0.0);
    CHECK(std::abs(left - right) <= 1e-10 * std::max(1.0, std::abs(right)));
    const double dl = u.derivative(-1e-300), dr = u.derivative(0.0);
    CHECK(std::abs(dl - dr) <= 1e-10 * std::max(1.0, std::abs(dr)));
  }
  // ODE residual by central differences of u' at moderate kappa.
  const ExactBenchmarkSolution u(2.0, 5.0);
  for (double x : {-0.8, -0.3, 0.2, 0.7}) {
    const double h = 1e-5;
    const double upp = (u.derivative(x + h) - u.derivative(x - h)) / (2 * h);
    const double k = x < 0 ? 2.0 : 5.0;
    CHECK(-upp + k * k * u.value(x) == doctest::Approx(4.0).epsilon(1e-7));
  }
}

TEST_CASE("exact solution stays bounded") {
  const ExactBenchmarkSolution u(1e-3, 1e6);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> x(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double v = u.value(x(rng));
    REQUIRE(std::isfinite(v));
    worst = std::max(worst, std::abs(v));
  }
  CHECK(worst <= 1.001);
  CHECK(std::isfinite(u.energy_sq(3)));
  CHECK(std::isfinite(ExactBenchmarkSolution(1e6, 1e6).energy_sq(3)));
}

TEST_CASE("exact solution integral") {
  for (auto [k1, k2] : {std::pair{0.3, 0.7}, {1.0, 10.0}, {4.0, 40.0}}) {
    const ExactBenchmarkSolution u(k1, k2);
    const double num = simpson([&](double x) { return u.value(x); }, -1, 0, 20000) +
                       simpson([&](double x) { return u.value(x); }, 0, 1, 20000);
    CHECK(u.integral() == doctest::Approx(num).epsilon(1e-10));
    // |||u|||^2 against quadrature of u'^2 + kappa^2 u^2.
    // kappa per side, so the shared endpoint x = 0 uses the right one.
    auto density = [&](double k) {
      return [&u, k](double x) { return u.derivative(x) * u.derivative(x) + k * k * u.value(x) * u.value(x); };
    };
    const double energy = simpson(density(k1), -1, 0, 20000) + simpson(density(k2), 0, 1, 20000);
    CHECK(u.energy_sq(2) == doctest::Approx(2.0 * energy).epsilon(1e-9));
  }
  CHECK_THROWS_AS(ExactBenchmarkSolution(0.0, 1.0), ConfigError);
}

TEST_CASE("benchmark mesh size") {
  CHECK(benchmark_cube_mesh(3, 16, 1.0, 1e6).num_free_vertices() == 4335);
  for (int dim : {2, 3})
    for (int M : {2, 4, 6}) {
      std::size_t expect = M - 1;
      for (int k = 1; k < dim; ++k) expect *= M + 1;
      CHECK(benchmark_cube_mesh(dim, M, 1.0, 2.0).num_free_vertices() == expect);
    }
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(run_benchmark(small_config(2, 3, 1.0, 2.0)), ConfigError);
  CHECK_THROWS_AS(run_benchmark(small_config(2, 0, 1.0, 2.0)), ConfigError);
  CHECK_THROWS_AS(run_benchmark(small_config(2, 4, -1.0, 2.0)), ConfigError);
  CHECK_THROWS_AS(run_benchmark(small_config(2, 4, 3.0, 2.0)), ConfigError);
  CHECK_THROWS_AS(run_benchmark(small_config(1, 4, 1.0, 2.0)), ConfigError);
  CHECK_THROWS_AS(sweep_mesh(small_config(2, 4, 1.0, 2.0), {}), ConfigError);
}

TEST_CASE("benchmark rows") {
  for (double k1 : {1e-3, 1.0, 1e2, 1e4}) {
    const BenchmarkRow row = run_benchmark(small_config(2, 8, k1, 1e6));
    CHECK(row.ndof == 7 * 9);
    CHECK(row.true_error > 0.0);
    REQUIRE(row.eta_tau);
    REQUIRE(row.eta_taustar);
    CHECK(*row.eta_tau >= row.true_error - 1e-8);
    CHECK(*row.eta_taustar >= row.true_error - 1e-8);
    CHECK(*row.eta_taustar <= *row.eta_tau * (1 + 1e-12));
    CHECK(row.osc_gn == 0.0);
  }
}

TEST_CASE("true error routes agree") {
  for (double k1 : {1.0, 10.0}) {
    RunConfig c = small_config(2, 8, k1, 1e2);
    c.quadrature_true_error = true;
    c.true_error_subdivision = 8;
    const BenchmarkRow row = run_benchmark(c);
    REQUIRE(row.true_error_quadrature);
    CHECK(row.true_error == doctest::Approx(*row.true_error_quadrature).epsilon(1e-4));
  }
}

TEST_CASE("csv output") {
  CHECK(std::string(kCsvHeader) ==
        "d,M,ndof,kappa1,kappa2,true_error,eta_tau,eta_taustar,osc_f,osc_gn,ieff_tau,ieff_taustar,solver_iters,"
        "runtime_ms");
  auto run = [](Execution exec) {
    RunConfig c = small_config(2, 4, 1.0, 1e6);
    c.exec = exec;
    std::ostringstream out;
    sweep_kappa(c, {1e-3, 1.0, 1e4}, &out);
    return out.str();
  };
  const std::string a = run(Execution::Sequential);
  CHECK(a == run(Execution::Sequential));
  CHECK(a == run(Execution::Parallel));
  std::istringstream lines(a);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    ++n;
    CHECK(std::count(line.begin(), line.end(), ',') == 13);
    CHECK(line.rfind("2,4,15,", 0) == 0);
    CHECK(line.ends_with(",0.000"));
  }
  CHECK(n == 3);

  RunConfig tau_only = small_config(2, 4, 1.0, 1e6);
  tau_only.strategy = Strategy::Tau;
  const std::string row = csv_row(run_benchmark(tau_only));
  CHECK(row.find(",nan,") != std::string::npos);
}

TEST_CASE("mesh sweep") {
  std::ostringstream out;
  const auto rows = sweep_mesh(small_config(2, 2, 100.0, 1e6), {2, 4, 8}, &out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].true_error > rows[2].true_error);
  for (const auto& r : rows) CHECK(*r.ieff_taustar() >= 1.0 - 1e-10);
}
