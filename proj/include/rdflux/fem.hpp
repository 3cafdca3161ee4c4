// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rdflux/execution.hpp"
#include "rdflux/mesh.hpp"
#include "rdflux/sparse.hpp"
#include "rdflux/types.hpp"

#include <vector>

namespace rdflux {

/// Data of -div grad u + kappa^2 u = f, u = 0 on Gamma_D, du/dn = g_N on
/// Gamma_N. kappa lives in the mesh.
struct ProblemData {
  ScalarField source = [](const Point&) { return 0.0; };
  ScalarField neumann = [](const Point&) { return 0.0; };
  /// Quadrature degree for integrals involving source and neumann.
  int data_degree = 8;
};

/// P1 system after eliminating Dirichlet vertices.
struct LinearSystem {
  CsrMatrix matrix;
  std::vector<double> rhs;
  std::vector<int> dof_of_vertex;  // -1 on Dirichlet vertices
  std::vector<int> vertex_of_dof;
};

struct FemSolution {
  int dim = 0;
  std::vector<double> values;     // per vertex, zero on Dirichlet vertices
  std::vector<double> gradients;  // per element, dim entries each
  std::size_t iterations = 0;
  double relative_residual = 0.0;

  Point gradient(int e) const {
    return Eigen::Map<const Vec>(gradients.data() + static_cast<std::size_t>(e) * dim, dim);
  }
  /// Vertex values of u_h on element e, in local vertex order.
  Vec element_values(const Mesh& mesh, int e) const;
};

/// Throws UnsolvableProblem when kappa vanishes everywhere and there is no
/// Dirichlet boundary.
void check_solvability(const Mesh& mesh);

/// Element-parallel assembly: local matrices are computed independently and
/// each matrix row gathers its contributions in ascending element order.
LinearSystem assemble(const Mesh& mesh, const ProblemData& data, Execution exec = Execution::Sequential);

/// Serial scatter-add assembly kept as a reference for the parallel kernel.
LinearSystem assemble_reference(const Mesh& mesh, const ProblemData& data);

/// Assembles, solves and expands to a vertex vector.
FemSolution solve_fem(const Mesh& mesh, const ProblemData& data, const SolverOptions& options = {});

/// Builds a FemSolution from arbitrary vertex values (used for manufactured
/// discrete functions).
FemSolution make_discrete_function(const Mesh& mesh, std::vector<double> values);

/// Local P1 mass matrix: |K| (1 + delta_ij) / ((d+1)(d+2)).
Mat p1_mass_matrix(int dim, double measure);

/// int_K f lambda_i for each local vertex i.
Vec element_source_load(const SimplexGeometry& K, const ProblemData& data);

/// Sum over the Neumann facets of e of int g_N lambda_i.
Vec element_neumann_load(const Mesh& mesh, const ProblemData& data, int e);

/// L2(K) projection onto affine functions; returns vertex values.
Vec project_element(const ScalarField& f, const SimplexGeometry& K, int degree = 8);

/// L2(facet) projection onto affine functions; returns facet-vertex values.
Vec project_facet(const ScalarField& g, const Mat& facet_vertices, int degree = 8);

/// Energy norm sqrt(sum_K int |grad v|^2 + kappa_K^2 v^2) of a callable v.
double energy_norm(const Mesh& mesh, const ScalarField& value,
                   const std::function<Point(const Point&)>& gradient, int degree,
                   Execution exec = Execution::Sequential);

/// Exact energy norm of a discrete P1 function.
double energy_norm(const Mesh& mesh, const FemSolution& uh, Execution exec = Execution::Sequential);

/// B(u_h, v_h) for two discrete functions (exact).
double bilinear_form(const Mesh& mesh, const FemSolution& a, const FemSolution& b,
                     Execution exec = Execution::Sequential);

/// F(v_h) for a discrete function.
double linear_form(const Mesh& mesh, const ProblemData& data, const FemSolution& v,
                   Execution exec = Execution::Sequential);

}  // namespace rdflux
