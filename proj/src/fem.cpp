// SPDX-License-Identifier: Apache-2.0
#include "rdflux/fem.hpp"

#include "rdflux/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace rdflux {
namespace {

struct LocalSystems {
  int nv = 0;
  std::vector<double> matrices;  // nv*nv per element
  std::vector<double> loads;     // nv per element, includes Neumann facet terms
};

LocalSystems local_systems(const Mesh& mesh, const ProblemData& data, Execution exec) {
  const int dim = mesh.dim();
  LocalSystems ls;
  ls.nv = dim + 1;
  const std::size_t ne = mesh.num_elements();
  ls.matrices.assign(ne * ls.nv * ls.nv, 0.0);
  ls.loads.assign(ne * ls.nv, 0.0);
  parallel_for(exec, ne, [&](std::size_t e) {
    const SimplexGeometry K = mesh.element_geometry(static_cast<int>(e));
    const double k2 = mesh.kappa(static_cast<int>(e)) * mesh.kappa(static_cast<int>(e));
    const Mat stiff = K.volume * K.grad_lambda.transpose() * K.grad_lambda;
    const Mat mass = p1_mass_matrix(dim, K.volume);
    double* m = ls.matrices.data() + e * ls.nv * ls.nv;
    for (int i = 0; i < ls.nv; ++i)
      for (int j = 0; j < ls.nv; ++j) m[i * ls.nv + j] = stiff(i, j) + k2 * mass(i, j);
    const Vec load = element_source_load(K, data) + element_neumann_load(mesh, data, static_cast<int>(e));
    for (int i = 0; i < ls.nv; ++i) ls.loads[e * ls.nv + i] = load[i];
  });
  return ls;
}

void number_dofs(const Mesh& mesh, LinearSystem& sys) {
  sys.dof_of_vertex.assign(mesh.num_vertices(), -1);
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
    if (!mesh.is_dirichlet_vertex(static_cast<int>(v))) {
      sys.dof_of_vertex[v] = static_cast<int>(sys.vertex_of_dof.size());
      sys.vertex_of_dof.push_back(static_cast<int>(v));
    }
}

void build_pattern(const Mesh& mesh, LinearSystem& sys, Execution exec) {
  const std::size_t n = sys.vertex_of_dof.size();
  std::vector<std::vector<int>> rows(n);
  parallel_for(exec, n, [&](std::size_t i) {
    auto& row = rows[i];
    for (int e : mesh.vertex_patch(sys.vertex_of_dof[i]))
      for (int v : mesh.element(e))
        if (sys.dof_of_vertex[v] >= 0) row.push_back(sys.dof_of_vertex[v]);
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  });
  CsrMatrix& A = sys.matrix;
  A.rows = n;
  A.offsets.assign(1, 0);
  for (const auto& row : rows) {
    A.cols.insert(A.cols.end(), row.begin(), row.end());
    A.offsets.push_back(static_cast<int>(A.cols.size()));
  }
  A.values.assign(A.cols.size(), 0.0);
  sys.rhs.assign(n, 0.0);
}

}  // namespace

Vec element_source_load(const SimplexGeometry& K, const ProblemData& data) {
  const QuadratureRule& rule = rule_for(K.dim, std::min(data.data_degree + 1, kMaxQuadratureDegree));
  Vec load = Vec::Zero(K.dim + 1);
  for (std::size_t q = 0; q < rule.size(); ++q)
    load += rule.weights[q] * data.source(K.from_barycentric(rule.nodes[q])) * rule.nodes[q];
  double fact = 1.0;
  for (int k = 2; k <= K.dim; ++k) fact *= k;
  return load * (K.volume * fact);
}

Vec element_neumann_load(const Mesh& mesh, const ProblemData& data, int e) {
  const int dim = mesh.dim();
  Vec load = Vec::Zero(dim + 1);
  const auto facets = mesh.element_facets(e);
  const QuadratureRule& rule = rule_for(dim - 1, std::min(data.data_degree + 1, kMaxQuadratureDegree));
  double fact = 1.0;
  for (int k = 2; k <= dim - 1; ++k) fact *= k;
  for (int i = 0; i <= dim; ++i) {
    if (!mesh.facet(facets[i]).is_neumann()) continue;
    const Mat fv = mesh.facet_coordinates(facets[i]);
    const double scale = embedded_simplex_measure(fv) * fact;
    // Facet vertex j is element vertex j (j < i) or j + 1 (j >= i).
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double gq = rule.weights[q] * data.neumann(Point(fv * rule.nodes[q])) * scale;
      for (int j = 0; j < dim; ++j) load[j < i ? j : j + 1] += gq * rule.nodes[q][j];
    }
  }
  return load;
}

Mat p1_mass_matrix(int dim, double measure) {
  const double c = measure / ((dim + 1.0) * (dim + 2.0));
  Mat m = Mat::Constant(dim + 1, dim + 1, c);
  m.diagonal().array() += c;
  return m;
}

Vec FemSolution::element_values(const Mesh& mesh, int e) const {
  const auto ids = mesh.element(e);
  Vec u(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) u[static_cast<Eigen::Index>(i)] = values[ids[i]];
  return u;
}

void check_solvability(const Mesh& mesh) {
  const bool any_kappa = std::any_of(mesh.kappa().begin(), mesh.kappa().end(), [](double k) { return k > 0.0; });
  const bool any_dirichlet =
      std::any_of(mesh.facets().begin(), mesh.facets().end(), [](const Facet& f) { return f.is_dirichlet(); });
  if (!any_kappa && !any_dirichlet)
    throw UnsolvableProblem("kappa vanishes everywhere and there is no Dirichlet boundary");
}

LinearSystem assemble(const Mesh& mesh, const ProblemData& data, Execution exec) {
  check_solvability(mesh);
  const LocalSystems ls = local_systems(mesh, data, exec);
  LinearSystem sys;
  number_dofs(mesh, sys);
  build_pattern(mesh, sys, exec);
  const int nv = ls.nv;
  parallel_for(exec, sys.vertex_of_dof.size(), [&](std::size_t i) {
    const int v = sys.vertex_of_dof[i];
    for (int e : mesh.vertex_patch(v)) {
      const auto ids = mesh.element(e);
      const int li = static_cast<int>(std::find(ids.begin(), ids.end(), v) - ids.begin());
      const double* m = ls.matrices.data() + static_cast<std::size_t>(e) * nv * nv;
      for (int lj = 0; lj < nv; ++lj) {
        const int dof = sys.dof_of_vertex[ids[lj]];
        if (dof < 0) continue;
        sys.matrix.values[sys.matrix.find(static_cast<int>(i), dof)] += m[li * nv + lj];
      }
      sys.rhs[i] += ls.loads[static_cast<std::size_t>(e) * nv + li];
    }
  });
  return sys;
}

LinearSystem assemble_reference(const Mesh& mesh, const ProblemData& data) {
  check_solvability(mesh);
  const LocalSystems ls = local_systems(mesh, data, Execution::Sequential);
  LinearSystem sys;
  number_dofs(mesh, sys);
  build_pattern(mesh, sys, Execution::Sequential);
  const int nv = ls.nv;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto ids = mesh.element(static_cast<int>(e));
    for (int li = 0; li < nv; ++li) {
      const int row = sys.dof_of_vertex[ids[li]];
      if (row < 0) continue;
      for (int lj = 0; lj < nv; ++lj) {
        const int col = sys.dof_of_vertex[ids[lj]];
        if (col < 0) continue;
        sys.matrix.values[sys.matrix.find(row, col)] += ls.matrices[e * nv * nv + li * nv + lj];
      }
      sys.rhs[row] += ls.loads[e * nv + li];
    }
  }
  return sys;
}

FemSolution make_discrete_function(const Mesh& mesh, std::vector<double> values) {
  FemSolution s;
  s.dim = mesh.dim();
  s.values = std::move(values);
  s.gradients.assign(mesh.num_elements() * mesh.dim(), 0.0);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Mat grads = barycentric_gradients(mesh.element_vertices(static_cast<int>(e)));
    const Point g = grads * s.element_values(mesh, static_cast<int>(e));
    for (int k = 0; k < s.dim; ++k) s.gradients[e * s.dim + k] = g[k];
  }
  return s;
}

FemSolution solve_fem(const Mesh& mesh, const ProblemData& data, const SolverOptions& options) {
  const LinearSystem sys = assemble(mesh, data, options.exec);
  const SolveResult res = solve_spd(sys.matrix, sys.rhs, options);
  std::vector<double> values(mesh.num_vertices(), 0.0);
  for (std::size_t i = 0; i < sys.vertex_of_dof.size(); ++i) values[sys.vertex_of_dof[i]] = res.x[i];
  FemSolution s = make_discrete_function(mesh, std::move(values));
  s.iterations = res.iterations;
  s.relative_residual = res.relative_residual;
  return s;
}

Vec project_element(const ScalarField& f, const SimplexGeometry& K, int degree) {
  const int nv = K.dim + 1;
  const QuadratureRule& rule = rule_for(K.dim, std::min(degree + 1, kMaxQuadratureDegree));
  double fact = 1.0;
  for (int k = 2; k <= K.dim; ++k) fact *= k;
  Vec rhs = Vec::Zero(nv);
  for (std::size_t q = 0; q < rule.size(); ++q)
    rhs += rule.weights[q] * f(K.from_barycentric(rule.nodes[q])) * rule.nodes[q];
  rhs *= K.volume * fact;
  return p1_mass_matrix(K.dim, K.volume).llt().solve(rhs);
}

Vec project_facet(const ScalarField& g, const Mat& facet_vertices, int degree) {
  const int k = static_cast<int>(facet_vertices.cols()) - 1;
  const double measure = embedded_simplex_measure(facet_vertices);
  if (k == 0) return Vec::Constant(1, g(Point(facet_vertices.col(0))));
  const QuadratureRule& rule = rule_for(k, std::min(degree + 1, kMaxQuadratureDegree));
  double fact = 1.0;
  for (int i = 2; i <= k; ++i) fact *= i;
  Vec rhs = Vec::Zero(k + 1);
  for (std::size_t q = 0; q < rule.size(); ++q)
    rhs += rule.weights[q] * g(Point(facet_vertices * rule.nodes[q])) * rule.nodes[q];
  rhs *= measure * fact;
  return p1_mass_matrix(k, measure).llt().solve(rhs);
}

double energy_norm(const Mesh& mesh, const ScalarField& value, const std::function<Point(const Point&)>& gradient,
                   int degree, Execution exec) {
  const QuadratureRule& rule = rule_for(mesh.dim(), degree);
  const double sum = blocked_sum(exec, mesh.num_elements(), [&](std::size_t e) {
    const SimplexGeometry K = mesh.element_geometry(static_cast<int>(e));
    const double k2 = mesh.kappa(static_cast<int>(e)) * mesh.kappa(static_cast<int>(e));
    return integrate_on(K.vertices, K.volume, rule, [&](const Point& x) {
      const double v = value(x);
      return gradient(x).squaredNorm() + k2 * v * v;
    });
  });
  return std::sqrt(sum);
}

double bilinear_form(const Mesh& mesh, const FemSolution& a, const FemSolution& b, Execution exec) {
  return blocked_sum(exec, mesh.num_elements(), [&](std::size_t e) {
    const int el = static_cast<int>(e);
    const SimplexGeometry K = mesh.element_geometry(el);
    const double k2 = mesh.kappa(el) * mesh.kappa(el);
    const Vec ua = a.element_values(mesh, el), ub = b.element_values(mesh, el);
    return K.volume * a.gradient(el).dot(b.gradient(el)) +
           k2 * ua.dot(p1_mass_matrix(mesh.dim(), K.volume) * ub);
  });
}

double energy_norm(const Mesh& mesh, const FemSolution& uh, Execution exec) {
  return std::sqrt(bilinear_form(mesh, uh, uh, exec));
}

double linear_form(const Mesh& mesh, const ProblemData& data, const FemSolution& v, Execution exec) {
  const LocalSystems ls = local_systems(mesh, data, exec);
  return blocked_sum(exec, mesh.num_elements(), [&](std::size_t e) {
    const Vec ve = v.element_values(mesh, static_cast<int>(e));
    double s = 0.0;
    for (int i = 0; i < ls.nv; ++i) s += ls.loads[e * ls.nv + i] * ve[i];
    return s;
  });
}

}  // namespace rdflux
