// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rdflux/execution.hpp"
#include "rdflux/fem.hpp"
#include "rdflux/mesh.hpp"
#include "rdflux/types.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

namespace rdflux {

/// Elements with kappa * rho <= 1 are equilibrated exactly; the others only
/// in the least-squares sense.
inline bool small_reaction(double kappa, double inradius) { return kappa * inradius <= 1.0; }

/// Constant normal fluxes of u_h on each facet, taken w.r.t. the normal of
/// the facet's side_a element. Boundary facets: average = own flux, jump = 0.
struct FacetFluxes {
  std::vector<double> average;
  std::vector<double> jump;
};

FacetFluxes facet_average_and_jump(const Mesh& mesh, const FemSolution& uh);

/// Dual basis of P1 on a facet given as vertex columns: column m holds the
/// vertex values of psi^m, with int psi^m theta_n = delta_mn.
Mat dual_basis(const Mat& facet_vertices);

/// theta_n on K, or its approximate minimum energy extension when
/// kappa * rho > 1: piecewise affine on the d+1 simplices conv(facet_i, x_P),
/// zero on conv(facet_n, x_P).
struct Extension {
  int n = 0;
  bool plain = true;
  double delta = 0.0;
  Vec xp_barycentric;  // barycentric coordinates of x_P in K
  Point xp;
  /// Vertex columns of the pieces carrying theta*; pieces[j] is conv(facet_i,
  /// x_P) for the j-th index i != n, with x_P as the last column.
  std::vector<Mat> pieces;
  /// Column of x_n within each piece.
  std::vector<int> vertex_column;

  double value(const SimplexGeometry& K, const Point& x) const;
  /// Same, from barycentric coordinates in K.
  double value_barycentric(const Vec& lambda) const;
};

Extension extension(const SimplexGeometry& K, int n, double kappa);

/// D_K(theta_n) and D_K(theta*_n) for n = 0..d, plus the sum of absolute
/// values of the individual contributions (the audit scale).
struct ElementFunctionals {
  Vec plain;
  Vec extended;
  Vec scale;
};

ElementFunctionals residual_functionals(const Mesh& mesh, int e, const FemSolution& uh, const ProblemData& data,
                                        const FacetFluxes& fluxes);

/// Diagnostics of one vertex-patch solve.
struct PatchReport {
  int vertex = -1;
  int equality_rows = 0;
  int lsq_rows = 0;
  int unknowns = 0;
  double objective = 0.0;
  double constraint_residual = 0.0;
  double scale = 0.0;
};

/// Local problem at one vertex: unknown facets (ascending facet id, which is
/// the canonical vertex-key order), equality rows E a = e and least-squares
/// rows L a ~ l.
struct PatchSystem {
  int vertex = -1;
  std::vector<int> facets;
  Eigen::MatrixXd E, L;
  Eigen::VectorXd e, l;
  Eigen::VectorXd e_scale;  // per equality row
};

PatchSystem build_patch_system(const Mesh& mesh, int v, const std::vector<ElementFunctionals>& functionals);

/// Minimum Euclidean norm minimizer of |L a - l| subject to E a = e, by the
/// nullspace method with SVD pseudo-inverses. Rank cuts are relative to the
/// largest singular value of E and of L respectively.
Eigen::VectorXd min_norm_constrained_lsq(const Eigen::MatrixXd& E, const Eigen::VectorXd& e,
                                         const Eigen::MatrixXd& L, const Eigen::VectorXd& l,
                                         double rank_tol = 1e-12);

/// Solves the patch problem; throws InfeasibleConstraints when the equality
/// residual exceeds 1e-9 times the row scale.
Eigen::VectorXd solve_vertex_patch(const PatchSystem& sys, PatchReport* report = nullptr);

struct EquilibratedFluxes {
  int dim = 0;
  FacetFluxes fluxes;
  std::vector<double> alpha;  // per facet, dim coefficients in facet vertex order
  std::vector<ElementFunctionals> functionals;
  std::vector<PatchReport> patches;
  /// max |eps_K(theta_n)| / scale over elements with kappa * rho <= 1.
  double max_equilibration_ratio = 0.0;

  double alpha_at(int f, int j) const { return alpha[static_cast<std::size_t>(f) * dim + j]; }
  /// Vertex values of the facet flux w.r.t. the side_a normal.
  Vec facet_values(const Mesh& mesh, int f) const;
  /// Vertex values of g_K on the facet opposite local vertex `local` of e,
  /// in facet vertex order.
  Vec element_facet_values(const Mesh& mesh, int e, int local) const;
  /// eps_K(theta_n) (or with theta*_n) with the solved coefficients.
  double epsilon(const Mesh& mesh, int e, int n, bool extended = false) const;
  /// Audit scale for (K, n): functional scale plus the coefficient terms.
  double epsilon_scale(const Mesh& mesh, int e, int n) const;
};

EquilibratedFluxes equilibrate(const Mesh& mesh, const FemSolution& uh, const ProblemData& data,
                               Execution exec = Execution::Sequential);

/// Per-vertex patch diagnostics as CSV.
void write_patch_report(std::ostream& out, const std::vector<PatchReport>& patches);

}  // namespace rdflux
