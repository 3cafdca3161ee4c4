// SPDX-License-Identifier: Apache-2.0
#include "rdflux/equilibration.hpp"

#include "rdflux/quadrature.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace rdflux {
namespace {

constexpr double kFeasibilityTol = 1e-9;

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Position of an element vertex within the facet opposite local vertex
// facet_local (facet vertices keep the element's ascending order).
int facet_position(int facet_local, int element_vertex) {
  return element_vertex < facet_local ? element_vertex : element_vertex - 1;
}

// Singular values at or below tol * max(s_0, reference) are dropped.
using Svd = Eigen::BDCSVD<Eigen::MatrixXd>;

Eigen::VectorXd pinv_apply(const Svd& svd, const Eigen::VectorXd& b, double tol,
                           double reference = 0.0) {
  const auto& s = svd.singularValues();
  if (s.size() == 0) return Eigen::VectorXd::Zero(svd.matrixV().rows());
  const double cut = tol * std::max(s[0], reference);
  Eigen::VectorXd ub = svd.matrixU().transpose() * b;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(svd.matrixV().rows());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > cut) x += svd.matrixV().col(i) * (ub[i] / s[i]);
  return x;
}

}  // namespace

FacetFluxes facet_average_and_jump(const Mesh& mesh, const FemSolution& uh) {
  FacetFluxes out;
  out.average.assign(mesh.num_facets(), 0.0);
  out.jump.assign(mesh.num_facets(), 0.0);
  for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
    const Facet& facet = mesh.facet(static_cast<int>(f));
    const SimplexGeometry K = mesh.element_geometry(facet.side_a.element);
    const Point n = K.outward_normal(facet.side_a.local);
    const double own = uh.gradient(facet.side_a.element).dot(n);
    if (facet.interior()) {
      const double other = uh.gradient(facet.side_b->element).dot(n);
      out.average[f] = 0.5 * (own + other);
      out.jump[f] = own - other;
    } else {
      out.average[f] = own;
    }
  }
  return out;
}

Mat dual_basis(const Mat& facet_vertices) {
  const int k = static_cast<int>(facet_vertices.cols()) - 1;
  const double measure = embedded_simplex_measure(facet_vertices);
  if (!(measure > 0.0)) throw DegenerateSimplex("degenerate facet in dual basis");
  return p1_mass_matrix(k, measure).inverse();
}

Extension extension(const SimplexGeometry& K, int n, double kappa) {
  Extension ext;
  ext.n = n;
  const int d = K.dim;
  if (small_reaction(kappa, K.inradius)) return ext;
  ext.plain = false;
  ext.delta = std::min(1.0, 1.0 / (kappa * K.inradius)) / d;
  ext.xp_barycentric = Vec::Constant(d + 1, ext.delta);
  ext.xp_barycentric[n] = 1.0 - d * ext.delta;
  ext.xp = K.from_barycentric(ext.xp_barycentric);
  for (int i = 0; i <= d; ++i) {
    if (i == n) continue;
    Mat piece(d, d + 1);
    for (int j = 0, c = 0; j <= d; ++j)
      if (j != i) piece.col(c++) = K.vertex(j);
    piece.col(d) = ext.xp;
    simplex_volume(piece);
    ext.pieces.push_back(piece);
    ext.vertex_column.push_back(facet_position(i, n));
  }
  return ext;
}

double Extension::value(const SimplexGeometry& K, const Point& x) const {
  return value_barycentric(K.barycentric(x));
}

double Extension::value_barycentric(const Vec& l) const {
  if (plain) return l[n];
  const int d = static_cast<int>(l.size()) - 1;
  // In piece conv(facet_i, x_P) the coordinate of x_P is lambda_i / delta,
  // and the piece containing x is the one with the smallest lambda_i.
  double lmin = INFINITY;
  for (int i = 0; i <= d; ++i)
    if (i != n) lmin = std::min(lmin, l[i]);
  return std::max(0.0, l[n] - (1.0 - d * delta) / delta * lmin);
}

ElementFunctionals residual_functionals(const Mesh& mesh, int e, const FemSolution& uh, const ProblemData& data,
                                        const FacetFluxes& fluxes) {
  const int d = mesh.dim();
  const SimplexGeometry K = mesh.element_geometry(e);
  const double kappa = mesh.kappa(e);
  const double k2 = kappa * kappa;
  const Vec u = uh.element_values(mesh, e);
  const Point grad = uh.gradient(e);

  const Vec source = element_source_load(K, data);
  const Vec neumann = element_neumann_load(mesh, data, e);
  const Vec stiff = K.volume * (K.grad_lambda.transpose() * grad);
  const Vec mass = k2 * (p1_mass_matrix(d, K.volume) * u);

  // Boundary term: sum over non-Neumann facets gamma_m (m != n) of
  // <du_h/dn_K> |gamma_m| / d.
  const auto facets = mesh.element_facets(e);
  Vec boundary = Vec::Zero(d + 1), boundary_abs = Vec::Zero(d + 1);
  for (int m = 0; m <= d; ++m) {
    const Facet& facet = mesh.facet(facets[m]);
    if (facet.is_neumann()) continue;
    const double t = facet.sign(e) * fluxes.average[facets[m]] * K.facet_measure[m] / d;
    for (int n = 0; n <= d; ++n)
      if (n != m) {
        boundary[n] += t;
        boundary_abs[n] += std::abs(t);
      }
  }

  ElementFunctionals out;
  out.plain = source + neumann - stiff - mass + boundary;
  out.scale = source.cwiseAbs() + neumann.cwiseAbs() + stiff.cwiseAbs() + mass.cwiseAbs() + boundary_abs;
  out.extended = out.plain;
  if (small_reaction(kappa, K.inradius)) return out;

  // theta*_n differs from theta_n only in the volume terms int (f - k^2 u_h) theta.
  const QuadratureRule& rule = rule_for(d, std::min(data.data_degree + 1, kMaxQuadratureDegree));
  const double fact = factorial(d);
  for (int n = 0; n <= d; ++n) {
    const Extension ext = extension(K, n, kappa);
    double f_part = 0.0, u_part = 0.0;
    for (std::size_t p = 0; p < ext.pieces.size(); ++p) {
      const Mat& S = ext.pieces[p];
      const double vol = simplex_volume(S) * fact;
      // Barycentric coordinates in K of the piece's vertices.
      Mat bary = Mat::Zero(d + 1, d + 1);
      const int skip = p < static_cast<std::size_t>(n) ? static_cast<int>(p) : static_cast<int>(p) + 1;
      for (int j = 0, c = 0; j <= d; ++j)
        if (j != skip) bary(j, c++) = 1.0;
      bary.col(d) = ext.xp_barycentric;
      double fs = 0.0, us = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vec& b = rule.nodes[q];
        const double theta = b[ext.vertex_column[p]];
        const Vec lk = bary * b;
        fs += rule.weights[q] * theta * data.source(K.from_barycentric(lk));
        us += rule.weights[q] * theta * u.dot(lk);
      }
      f_part += fs * vol;
      u_part += us * vol;
    }
    out.extended[n] = f_part + neumann[n] - stiff[n] - k2 * u_part + boundary[n];
  }
  return out;
}

PatchSystem build_patch_system(const Mesh& mesh, int v, const std::vector<ElementFunctionals>& functionals) {
  PatchSystem sys;
  sys.vertex = v;
  const auto patch = mesh.vertex_patch(v);
  for (int e : patch) {
    const auto ids = mesh.element(e);
    const auto facets = mesh.element_facets(e);
    const int n = static_cast<int>(std::find(ids.begin(), ids.end(), v) - ids.begin());
    for (int m = 0; m < static_cast<int>(ids.size()); ++m)
      if (m != n && !mesh.facet(facets[m]).is_neumann()) sys.facets.push_back(facets[m]);
  }
  std::sort(sys.facets.begin(), sys.facets.end());
  sys.facets.erase(std::unique(sys.facets.begin(), sys.facets.end()), sys.facets.end());

  const auto unknown = [&](int f) {
    return static_cast<Eigen::Index>(std::lower_bound(sys.facets.begin(), sys.facets.end(), f) - sys.facets.begin());
  };
  const auto nu = static_cast<Eigen::Index>(sys.facets.size());
  int neq = 0, nls = 0;
  for (int e : patch) (small_reaction(mesh.kappa(e), mesh.element_geometry(e).inradius) ? neq : nls)++;
  sys.E = Eigen::MatrixXd::Zero(neq, nu);
  sys.L = Eigen::MatrixXd::Zero(nls, nu);
  sys.e = Eigen::VectorXd::Zero(neq);
  sys.l = Eigen::VectorXd::Zero(nls);
  sys.e_scale = Eigen::VectorXd::Zero(neq);
  int ie = 0, il = 0;
  for (int e : patch) {
    const auto ids = mesh.element(e);
    const auto facets = mesh.element_facets(e);
    const int n = static_cast<int>(std::find(ids.begin(), ids.end(), v) - ids.begin());
    const bool exact = small_reaction(mesh.kappa(e), mesh.element_geometry(e).inradius);
    auto row = exact ? sys.E.row(ie) : sys.L.row(il);
    for (int m = 0; m < static_cast<int>(ids.size()); ++m) {
      if (m == n || mesh.facet(facets[m]).is_neumann()) continue;
      row[unknown(facets[m])] = mesh.facet(facets[m]).sign(e);
    }
    if (exact) {
      sys.e[ie] = -functionals[e].plain[n];
      sys.e_scale[ie] = functionals[e].scale[n];
      ++ie;
    } else {
      sys.l[il] = -functionals[e].extended[n];
      ++il;
    }
  }
  return sys;
}

Eigen::VectorXd min_norm_constrained_lsq(const Eigen::MatrixXd& E, const Eigen::VectorXd& e,
                                         const Eigen::MatrixXd& L, const Eigen::VectorXd& l, double rank_tol) {
  const Eigen::Index n = std::max(E.cols(), L.cols());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd Z = Eigen::MatrixXd::Identity(n, n);
  if (E.rows() > 0 && n > 0) {
    Svd svd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
    x = pinv_apply(svd, e, rank_tol);
    const auto& s = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < s.size() && s[rank] > rank_tol * s[0]) ++rank;
    Z = svd.matrixV().rightCols(n - rank);
  }
  if (L.rows() > 0 && Z.cols() > 0) {
    // The cut is measured against |L|: L Z can be pure round-off when the
    // least-squares rows only see directions already fixed by E.
    const double l_norm = Svd(L).singularValues()[0];
    const Eigen::MatrixXd LZ = L * Z;
    Svd svd(LZ, Eigen::ComputeThinU | Eigen::ComputeThinV);
    x += Z * pinv_apply(svd, l - L * x, rank_tol, l_norm);
  }
  return x;
}

Eigen::VectorXd solve_vertex_patch(const PatchSystem& sys, PatchReport* report) {
  const Eigen::VectorXd a = min_norm_constrained_lsq(sys.E, sys.e, sys.L, sys.l);
  double residual = 0.0, scale = 0.0;
  for (Eigen::Index i = 0; i < sys.E.rows(); ++i) {
    const double row_scale = sys.e_scale[i] + sys.E.row(i).cwiseAbs().dot(a.cwiseAbs());
    const double r = std::abs(sys.E.row(i).dot(a) - sys.e[i]);
    scale = std::max(scale, row_scale);
    if (r > kFeasibilityTol * row_scale + 1e-300)
      throw InfeasibleConstraints(fmt::format("vertex {}: equality constraint residual {:.3e} exceeds {:.3e}",
                                              sys.vertex, r, kFeasibilityTol * row_scale));
    residual = std::max(residual, r);
  }
  if (report) {
    report->vertex = sys.vertex;
    report->equality_rows = static_cast<int>(sys.E.rows());
    report->lsq_rows = static_cast<int>(sys.L.rows());
    report->unknowns = static_cast<int>(sys.facets.size());
    report->objective = sys.L.rows() > 0 ? (sys.L * a - sys.l).squaredNorm() : 0.0;
    report->constraint_residual = residual;
    report->scale = scale;
  }
  return a;
}

Vec EquilibratedFluxes::facet_values(const Mesh& mesh, int f) const {
  const Mat psi = dual_basis(mesh.facet_coordinates(f));
  Vec a(dim);
  for (int j = 0; j < dim; ++j) a[j] = alpha_at(f, j);
  return Vec::Constant(dim, fluxes.average[f]) + psi * a;
}

Vec EquilibratedFluxes::element_facet_values(const Mesh& mesh, int e, int local) const {
  const int f = mesh.element_facets(e)[local];
  return mesh.facet(f).sign(e) * facet_values(mesh, f);
}

double EquilibratedFluxes::epsilon(const Mesh& mesh, int e, int n, bool extended) const {
  const auto facets = mesh.element_facets(e);
  double eps = extended ? functionals[e].extended[n] : functionals[e].plain[n];
  for (int m = 0; m <= dim; ++m) {
    const Facet& facet = mesh.facet(facets[m]);
    if (m == n || facet.is_neumann()) continue;
    eps += facet.sign(e) * alpha_at(facets[m], facet_position(m, n));
  }
  return eps;
}

double EquilibratedFluxes::epsilon_scale(const Mesh& mesh, int e, int n) const {
  const auto facets = mesh.element_facets(e);
  double s = functionals[e].scale[n];
  for (int m = 0; m <= dim; ++m)
    if (m != n && !mesh.facet(facets[m]).is_neumann()) s += std::abs(alpha_at(facets[m], facet_position(m, n)));
  return s;
}

EquilibratedFluxes equilibrate(const Mesh& mesh, const FemSolution& uh, const ProblemData& data, Execution exec) {
  const int d = mesh.dim();
  EquilibratedFluxes out;
  out.dim = d;
  out.fluxes = facet_average_and_jump(mesh, uh);
  out.alpha.assign(mesh.num_facets() * d, 0.0);

  // Neumann coefficients: alpha^m = int (g_N - average) theta_m, which makes
  // the facet flux the L2 projection of g_N.
  const QuadratureRule& frule = rule_for(d - 1, std::min(data.data_degree + 1, kMaxQuadratureDegree));
  const double ffact = factorial(d - 1);
  parallel_for(exec, mesh.num_facets(), [&](std::size_t f) {
    if (!mesh.facet(static_cast<int>(f)).is_neumann()) return;
    const Mat fv = mesh.facet_coordinates(static_cast<int>(f));
    const double scale = embedded_simplex_measure(fv) * ffact;
    for (std::size_t q = 0; q < frule.size(); ++q) {
      const double g = frule.weights[q] * (data.neumann(Point(fv * frule.nodes[q])) - out.fluxes.average[f]) * scale;
      for (int j = 0; j < d; ++j) out.alpha[f * d + j] += g * frule.nodes[q][j];
    }
  });

  out.functionals.resize(mesh.num_elements());
  parallel_for(exec, mesh.num_elements(), [&](std::size_t e) {
    out.functionals[e] = residual_functionals(mesh, static_cast<int>(e), uh, data, out.fluxes);
  });

  // Each vertex writes only the coefficients attached to itself.
  out.patches.resize(mesh.num_vertices());
  parallel_for(exec, mesh.num_vertices(), [&](std::size_t v) {
    const PatchSystem sys = build_patch_system(mesh, static_cast<int>(v), out.functionals);
    const Eigen::VectorXd a = solve_vertex_patch(sys, &out.patches[v]);
    for (std::size_t k = 0; k < sys.facets.size(); ++k) {
      const int f = sys.facets[k];
      const auto fv = mesh.facet_vertices(f);
      const int j = static_cast<int>(std::find(fv.begin(), fv.end(), static_cast<int>(v)) - fv.begin());
      out.alpha[static_cast<std::size_t>(f) * d + j] = a[static_cast<Eigen::Index>(k)];
    }
  });

  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const int el = static_cast<int>(e);
    if (!small_reaction(mesh.kappa(el), mesh.element_geometry(el).inradius)) continue;
    for (int n = 0; n <= d; ++n) {
      const double ratio = std::abs(out.epsilon(mesh, el, n)) / std::max(out.epsilon_scale(mesh, el, n), 1e-300);
      out.max_equilibration_ratio = std::max(out.max_equilibration_ratio, ratio);
    }
  }
  if (out.max_equilibration_ratio > kFeasibilityTol)
    throw InfeasibleConstraints(
        fmt::format("equilibration audit failed: max |eps_K| / scale = {:.3e}", out.max_equilibration_ratio));
  return out;
}

void write_patch_report(std::ostream& out, const std::vector<PatchReport>& patches) {
  out << "vertex,equality_rows,lsq_rows,unknowns,objective,constraint_residual,scale\n";
  for (const PatchReport& p : patches)
    out << fmt::format("{},{},{},{},{:.6e},{:.6e},{:.6e}\n", p.vertex, p.equality_rows, p.lsq_rows, p.unknowns,
                       p.objective, p.constraint_residual, p.scale);
}

}  // namespace rdflux
