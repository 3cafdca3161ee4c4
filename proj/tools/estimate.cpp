// SPDX-License-Identifier: Apache-2.0
// estimate: runs the cube benchmark (or a user mesh) and writes CSV rows.
#include "rdflux/benchmark.hpp"
#include "rdflux/equilibration.hpp"
#include "rdflux/mesh.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>

namespace {

enum ExitCode { kOk = 0, kInputError = 1, kAuditFailure = 2, kSolverFailure = 3 };

void print_audits(const rdflux::BenchmarkRow& row) {
  const auto& r = row.report;
  fmt::print(std::cerr, "# M={} kappa1={:g}: equilibration {:.2e}, divergence {:.2e}, trace mismatch {:.2e}\n", row.M,
             row.kappa1, r.max_equilibration_ratio, r.max_divergence_ratio, r.max_trace_mismatch);
}

void warn_kappa_jumps(const rdflux::Mesh& mesh) {
  const auto bad = rdflux::kappa_jump_vertices(mesh);
  if (!bad.empty())
    fmt::print(std::cerr, "# warning: {} vertex patches have a kappa ratio above 100; robustness is not guaranteed\n",
               bad.size());
}

int run(int argc, char** argv) {
  CLI::App app{"Guaranteed a posteriori error bounds for -div grad u + kappa^2 u = f"};
  app.name("estimate");
  rdflux::RunConfig config;
  std::vector<double> kappa_list;
  std::vector<int> mesh_list;
  std::string strategy = "both", mesh_file, out_file, json_file;
  double source = 1.0;
  bool seq = false, verbose = false, no_timing = false;

  app.add_option("--dim", config.dim, "Space dimension")->check(CLI::IsMember({2, 3}));
  app.add_option("--m", config.M, "Subdivisions per axis (even)");
  app.add_option("--kappa1", config.kappa1, "Reaction coefficient for x1 < 0");
  app.add_option("--kappa2", config.kappa2, "Reaction coefficient for x1 > 0");
  auto* sk = app.add_option("--sweep-kappa", kappa_list, "Sweep kappa1 over a list")->delimiter(',');
  auto* sm = app.add_option("--sweep-mesh", mesh_list, "Sweep M over a list")->delimiter(',');
  sk->excludes(sm);
  app.add_option("--strategy", strategy, "Flux selection")->check(CLI::IsMember({"tau", "taustar", "both"}));
  auto* mf = app.add_option("--mesh", mesh_file, "Mesh file (text format) instead of the cube")
                 ->check(CLI::ExistingFile);
  mf->excludes(sk)->excludes(sm);
  app.add_option("--source", source, "Constant source f for --mesh runs")->needs(mf);
  app.add_option("--out", out_file, "CSV output (default stdout)");
  app.add_option("--json", json_file, "Structured report of a single run")->excludes(sk)->excludes(sm);
  app.add_flag("--seq", seq, "Sequential reference kernels");
  app.add_flag("--verbose", verbose, "Per-patch reports and audits on stderr");
  app.add_flag("--no-timing", no_timing, "Write 0 in runtime_ms for byte-stable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  config.strategy = strategy == "tau"       ? rdflux::Strategy::Tau
                    : strategy == "taustar" ? rdflux::Strategy::TauStar
                                            : rdflux::Strategy::Both;
  config.exec = seq ? rdflux::Execution::Sequential : rdflux::Execution::Parallel;
  config.timing = !no_timing;

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!out_file.empty()) {
    file.open(out_file);
    if (!file) {
      fmt::print(std::cerr, "error: cannot open {}\n", out_file);
      return kInputError;
    }
    out = &file;
  }
  *out << rdflux::kCsvHeader << std::endl;

  auto report = [&](const rdflux::BenchmarkRow& row) {
    if (!json_file.empty()) {
      std::ofstream js(json_file);
      rdflux::write_json(js, row.report);
    }
    if (!verbose) return;
    print_audits(row);
    rdflux::write_patch_report(std::cerr, row.patches);
  };

  if (!mesh_file.empty()) {
    std::ifstream in(mesh_file);
    const rdflux::Mesh mesh = rdflux::read_mesh(in);
    if (verbose) warn_kappa_jumps(mesh);
    rdflux::ProblemData data;
    data.source = [source](const rdflux::Point&) { return source; };
    rdflux::BenchmarkRow row = rdflux::run_problem(mesh, data, config);
    const auto [lo, hi] = std::minmax_element(mesh.kappa().begin(), mesh.kappa().end());
    row.kappa1 = *lo;
    row.kappa2 = *hi;
    *out << rdflux::csv_row(row) << std::endl;
    report(row);
    return kOk;
  }

  if (verbose) warn_kappa_jumps(rdflux::benchmark_cube_mesh(config.dim, 2, config.kappa1, config.kappa2));
  std::vector<rdflux::BenchmarkRow> rows;
  if (!kappa_list.empty())
    rows = rdflux::sweep_kappa(config, kappa_list, out);
  else if (!mesh_list.empty())
    rows = rdflux::sweep_mesh(config, mesh_list, out);
  else
    rows = rdflux::sweep_mesh(config, {config.M}, out);
  for (const auto& row : rows) report(row);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const rdflux::DivergenceAuditFailed& e) {
    fmt::print(std::cerr, "audit failure: {}\n", e.what());
    return kAuditFailure;
  } catch (const rdflux::InfeasibleConstraints& e) {
    fmt::print(std::cerr, "audit failure: {}\n", e.what());
    return kAuditFailure;
  } catch (const rdflux::ConformityAuditFailed& e) {
    fmt::print(std::cerr, "audit failure: {}\n", e.what());
    return kAuditFailure;
  } catch (const rdflux::NegativeDifference& e) {
    fmt::print(std::cerr, "audit failure: {}\n", e.what());
    return kAuditFailure;
  } catch (const rdflux::NotSpd& e) {
    fmt::print(std::cerr, "solver failure: {}\n", e.what());
    return kSolverFailure;
  } catch (const rdflux::NoConvergence& e) {
    fmt::print(std::cerr, "solver failure: {}\n", e.what());
    return kSolverFailure;
  } catch (const rdflux::UnsolvableProblem& e) {
    fmt::print(std::cerr, "solver failure: {}\n", e.what());
    return kSolverFailure;
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return kInputError;
  }
}
