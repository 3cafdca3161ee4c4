// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rdflux/equilibration.hpp"
#include "rdflux/execution.hpp"
#include "rdflux/fem.hpp"
#include "rdflux/flux.hpp"
#include "rdflux/mesh.hpp"
#include "rdflux/types.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

namespace rdflux {

/// Squared trace constants for facet `facet` of K. C_T exists only for
/// kappa > 0.
struct TraceConstants {
  std::optional<double> ct_sq;
  double ctbar_sq = 0.0;

  /// min{C_T, C_T-bar}, or C_T-bar alone when kappa = 0.
  double oscillation_constant() const;
};

TraceConstants trace_constants(const SimplexGeometry& K, int facet, double kappa);

/// Largest observed |v|_gamma / |||v|||_K and |v - mean_gamma v|_gamma / |||v|||_K
/// over random quadratic polynomials v (exact quadrature).
struct TraceRatios {
  double plain = 0.0;
  double mean_free = 0.0;
};

TraceRatios verify_trace_inequality(const SimplexGeometry& K, int facet, double kappa, int samples,
                                    std::mt19937_64& rng);

/// min{h/pi, 1/kappa} |f - Pi_K f|_K (h/pi when kappa = 0).
double oscillation_f(const SimplexGeometry& K, double kappa, const ScalarField& f, int degree = 8);

/// min{C_T, C_T-bar} |g - Pi_gamma g|_gamma on facet `facet` of K.
double oscillation_gN(const SimplexGeometry& K, int facet, double kappa, const ScalarField& g, int degree = 8);

enum class Strategy { Tau, TauStar, Both };

struct ElementReport {
  int variant_tau = 0;       // 0 when not computed
  int variant_taustar = 0;
  double eta_tau = 0.0;
  double eta_taustar = 0.0;
  double eta_variant1 = -1.0;  // -1 when not evaluated
  double eta_variant2 = -1.0;
  double osc_f = 0.0;
  double osc_gn = 0.0;  // sum over the Neumann facets of K
  double divergence_ratio = 0.0;  // audit residual / scale, small-reaction elements
};

struct ErrorReport {
  Strategy strategy = Strategy::Both;
  std::vector<ElementReport> elements;
  std::optional<double> eta_tau;
  std::optional<double> eta_taustar;
  double osc_f = 0.0;   // sqrt(sum osc_K^2)
  double osc_gn = 0.0;  // sqrt(sum (sum_gamma osc_gamma)^2)
  double max_equilibration_ratio = 0.0;
  double max_divergence_ratio = 0.0;
  double max_trace_mismatch = 0.0;  // relative, over the computed selections
  std::optional<double> true_error;
  std::optional<double> true_error_quadrature;

  std::optional<double> ieff_tau() const;
  std::optional<double> ieff_taustar() const;
};

struct EstimateOptions {
  Execution exec = Execution::Sequential;
  bool check_conformity = true;
  int oscillation_degree = 8;
};

ErrorReport estimate(const Mesh& mesh, const FemSolution& uh, const ProblemData& data, const EquilibratedFluxes& eq,
                     Strategy strategy, const EstimateOptions& options = {});

/// Equilibrates first.
ErrorReport estimate(const Mesh& mesh, const FemSolution& uh, const ProblemData& data, Strategy strategy,
                     const EstimateOptions& options = {});

/// Exact solution for error measurement. `energy_sq` is |||u|||^2 = F(u)
/// when known in closed form.
struct ExactSolution {
  ScalarField value;
  std::function<Point(const Point&)> gradient;
  std::optional<double> energy_sq;
};

struct TrueError {
  double quadrature = 0.0;            // direct quadrature of |||u - u_h|||
  std::optional<double> identity;     // sqrt(|||u|||^2 - 2 F(u_h) + B(u_h, u_h))
  double reference() const { return identity ? *identity : quadrature; }
};

/// `subdivision` splits each element into subdivision^d pieces for the
/// quadrature route. Throws NegativeDifference when the identity route's
/// radicand is below -1e-12 |||u|||^2.
TrueError true_error(const Mesh& mesh, const FemSolution& uh, const ProblemData& data, const ExactSolution& exact,
                     int subdivision = 1, int degree = 10, Execution exec = Execution::Sequential,
                     bool quadrature_route = true);

/// Structured debug dump (schema in README).
void write_json(std::ostream& out, const ErrorReport& report);

}  // namespace rdflux
