// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rdflux/equilibration.hpp"
#include "rdflux/execution.hpp"
#include "rdflux/fem.hpp"
#include "rdflux/geometry.hpp"
#include "rdflux/mesh.hpp"
#include "rdflux/types.hpp"

#include <variant>
#include <vector>

namespace rdflux {

/// R = g_K - grad u_h . n_K on every facet of one element. Entry (m, j) is
/// the value on facet m at local vertex j; the diagonal is unused (zero).
Mat facet_residuals(const Mesh& mesh, const EquilibratedFluxes& eq, const FemSolution& uh, int e);

/// Everything the element-level reconstructions need.
struct ElementFluxData {
  SimplexGeometry K;
  double kappa = 0.0;
  Point grad_uh;
  Mat R;
  Vec r_values;  // r = Pi_K f - kappa^2 u_h at the vertices
  Point grad_r;
  double projected_source_norm = 0.0;  // |Pi_K f|_K
  double uh_norm = 0.0;                // |u_h|_K
};

ElementFluxData element_flux_data(const Mesh& mesh, int e, const FemSolution& uh, const ProblemData& data,
                                  const EquilibratedFluxes& eq);

/// tau = grad u_h + tau_L + tau_Q with tau_L = -sum_n lambda_n c_n and a
/// quadratic correction whose normal trace vanishes.
struct FluxVariant1 {
  SimplexGeometry K;
  Point base;
  Mat coeff;  // column n is c_n
  Point grad_r;

  Point tau_l(const Vec& lambda) const;
  Point tau_q(const Vec& lambda) const;
  Point evaluate(const Point& x) const;
  Point evaluate_barycentric(const Vec& lambda) const;
  double divergence(const Point& x) const;
  double divergence_l() const;
};

FluxVariant1 build_variant1(const SimplexGeometry& K, const Point& grad_uh, const Mat& R, const Point& grad_r);

/// tau = grad u_h + tau_O, where on each cone K_gamma = conv(incentre, gamma)
/// tau_O = (1 - kappa x_d)^+ (x - x_K) R(x') / rho, x_d the distance from
/// gamma and R extended constantly along the normal.
struct FluxVariant2 {
  struct Cone {
    FacetFrame frame;
    Mat base;       // facet vertex columns
    Vec values;     // R at the facet vertices
    Point grad_R;   // tangential gradient of R
    Point centroid; // facet centroid, used to evaluate R
  };
  SimplexGeometry K;
  Point base_gradient;
  double kappa = 0.0;
  std::vector<Cone> cones;  // indexed by facet

  /// Facet whose cone contains x (nearest facet plane).
  int cone_of(const Point& x) const;
  double residual(int facet, const Point& x) const;
  Point tau_o(int facet, const Point& x) const;
  /// Same with the height x_d supplied by the caller.
  Point tau_o(int facet, const Point& x, double height) const;
  double divergence_o(int facet, const Point& x) const;
  double divergence_o(int facet, const Point& x, double height) const;
  Point evaluate(const Point& x) const;
  /// Evaluation from barycentric coordinates: the height above the nearest
  /// facet is lambda_i times the altitude, so it is exactly zero on facets.
  Point evaluate_barycentric(const Vec& lambda) const;
  double divergence(const Point& x) const;
};

FluxVariant2 build_variant2(const SimplexGeometry& K, const Point& grad_uh, const Mat& R, double kappa);

/// Triangulation of {x in cone : height(x) <= cut}, the cone given by its
/// base (dim x dim) and apex at distance `height` from the base plane. The
/// frustum is split into dim simplices; `cap` is the cut-off cone, empty
/// when cut >= height (then the whole cone is returned as one piece).
struct ActiveRegion {
  std::vector<Mat> frustum;
  std::vector<Vec> heights;  // vertex heights of each frustum piece
  Mat cap;
};

ActiveRegion split_active_region(const Mat& base, const Point& apex, double height, double cut);

struct ElementIndicator {
  int variant = 1;
  double eta = 0.0;
  double flux_norm = 0.0;        // |tau - grad u_h|_K
  double divergence_norm = 0.0;  // |r + div tau|_K
  bool divergence_included = false;
  double audit_scale = 0.0;
};

inline constexpr int kVariant1Degree = 4;
inline constexpr int kVariant2Degree = 6;
inline constexpr double kDivergenceAuditTolerance = 1e-9;

/// Throws DivergenceAuditFailed when kappa rho <= 1 and the divergence
/// residual is not negligible.
ElementIndicator eta_variant1(const ElementFluxData& data, int degree = kVariant1Degree);
/// Throws InvalidVariant when kappa = 0.
ElementIndicator eta_variant2(const ElementFluxData& data, int degree = kVariant2Degree);

using ElementFlux = std::variant<FluxVariant1, FluxVariant2>;

ElementFlux build_element_flux(const ElementFluxData& data, int variant);
Point evaluate(const ElementFlux& flux, const Point& x);
Point evaluate_barycentric(const ElementFlux& flux, const Vec& lambda);
double divergence(const ElementFlux& flux, const Point& x);

/// Largest |tau_K . n + tau_K' . n| over quadrature points of interior facets,
/// with `variant[e]` selecting the reconstruction on each element. Points are
/// passed to both sides as barycentric coordinates. When
/// `relative` is set each facet's value is divided by max(1, max |g_K|).
double max_normal_trace_mismatch(const Mesh& mesh, const FemSolution& uh, const ProblemData& data,
                                 const EquilibratedFluxes& eq, const std::vector<int>& variant,
                                 Execution exec = Execution::Sequential, bool relative = false);

}  // namespace rdflux
