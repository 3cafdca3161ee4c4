// SPDX-License-Identifier: Apache-2.0
#include "rdflux/flux.hpp"

#include "rdflux/quadrature.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace rdflux {

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Volume without the degeneracy threshold: frustum slices can be very thin.
double piece_volume(const Mat& v) {
  const int d = static_cast<int>(v.rows());
  Mat edges(d, d);
  for (int j = 0; j < d; ++j) edges.col(j) = v.col(j + 1) - v.col(0);
  return std::abs(edges.determinant()) / factorial(d);
}

template <class F>
double integrate_piece(const Mat& v, const QuadratureRule& rule, F&& f) {
  return integrate_on(v, piece_volume(v), rule, std::forward<F>(f));
}

}  // namespace

Mat facet_residuals(const Mesh& mesh, const EquilibratedFluxes& eq, const FemSolution& uh, int e) {
  const int d = mesh.dim();
  const SimplexGeometry K = mesh.element_geometry(e);
  const Point grad = uh.gradient(e);
  Mat R = Mat::Zero(d + 1, d + 1);
  for (int m = 0; m <= d; ++m) {
    const Vec g = eq.element_facet_values(mesh, e, m);
    const double normal_flux = grad.dot(K.outward_normal(m));
    for (int j = 0; j <= d; ++j)
      if (j != m) R(m, j) = g[j < m ? j : j - 1] - normal_flux;
  }
  return R;
}

ElementFluxData element_flux_data(const Mesh& mesh, int e, const FemSolution& uh, const ProblemData& data,
                                  const EquilibratedFluxes& eq) {
  ElementFluxData out;
  out.K = mesh.element_geometry(e);
  out.kappa = mesh.kappa(e);
  out.grad_uh = uh.gradient(e);
  out.R = facet_residuals(mesh, eq, uh, e);
  const Mat mass = p1_mass_matrix(out.K.dim, out.K.volume);
  const Vec projected = mass.llt().solve(element_source_load(out.K, data));
  const Vec u = uh.element_values(mesh, e);
  out.r_values = projected - out.kappa * out.kappa * u;
  out.grad_r = out.K.grad_lambda * out.r_values;
  out.projected_source_norm = std::sqrt(std::max(0.0, projected.dot(mass * projected)));
  out.uh_norm = std::sqrt(std::max(0.0, u.dot(mass * u)));
  return out;
}

// ---------------------------------------------------------------------------

Point FluxVariant1::tau_l(const Vec& lambda) const { return -(coeff * lambda); }

Point FluxVariant1::tau_q(const Vec& lambda) const {
  const int d = K.dim;
  Point q = Point::Zero(d);
  for (int n = 0; n <= d; ++n)
    for (int m = n + 1; m <= d; ++m) {
      const Point t = K.vertex(n) - K.vertex(m);
      q += lambda[m] * lambda[n] * t.dot(grad_r) * t;
    }
  return q / (d + 1);
}

Point FluxVariant1::evaluate(const Point& x) const {
  const Vec l = K.barycentric(x);
  return base + tau_l(l) + tau_q(l);
}

Point FluxVariant1::evaluate_barycentric(const Vec& lambda) const { return base + tau_l(lambda) + tau_q(lambda); }

double FluxVariant1::divergence_l() const {
  double s = 0.0;
  for (int n = 0; n <= K.dim; ++n) s -= K.grad_lambda.col(n).dot(coeff.col(n));
  return s;
}

double FluxVariant1::divergence(const Point& x) const { return divergence_l() + (K.centroid - x).dot(grad_r); }

FluxVariant1 build_variant1(const SimplexGeometry& K, const Point& grad_uh, const Mat& R, const Point& grad_r) {
  const int d = K.dim;
  FluxVariant1 v;
  v.K = K;
  v.base = grad_uh;
  v.grad_r = grad_r;
  v.coeff = Mat::Zero(d, d + 1);
  for (int n = 0; n <= d; ++n)
    for (int m = 0; m <= d; ++m)
      if (m != n) v.coeff.col(n) += R(m, n) * K.grad_lambda.col(m).norm() * (K.vertex(m) - K.vertex(n));
  return v;
}

// ---------------------------------------------------------------------------

int FluxVariant2::cone_of(const Point& x) const {
  const Vec l = K.barycentric(x);
  int best = 0;
  double best_h = l[0] / K.grad_lambda.col(0).norm();
  for (int i = 1; i <= K.dim; ++i) {
    const double h = l[i] / K.grad_lambda.col(i).norm();
    if (h < best_h) {
      best_h = h;
      best = i;
    }
  }
  return best;
}

double FluxVariant2::residual(int facet, const Point& x) const {
  const Cone& c = cones[facet];
  return c.values.mean() + c.grad_R.dot(x - c.centroid);
}

Point FluxVariant2::tau_o(int facet, const Point& x) const { return tau_o(facet, x, cones[facet].frame.height(x)); }

Point FluxVariant2::tau_o(int facet, const Point& x, double xd) const {
  const double damp = std::max(0.0, 1.0 - kappa * xd);
  if (damp == 0.0) return Point::Zero(K.dim);
  return (damp * residual(facet, x) / K.inradius) * (x - K.incentre);
}

double FluxVariant2::divergence_o(int facet, const Point& x) const {
  return divergence_o(facet, x, cones[facet].frame.height(x));
}

double FluxVariant2::divergence_o(int facet, const Point& x, double xd) const {
  const Cone& c = cones[facet];
  const double damp = 1.0 - kappa * xd;
  if (damp <= 0.0) return 0.0;
  const Point rel = x - K.incentre;
  const double R = residual(facet, x);
  return (damp * (K.dim * R + rel.dot(c.grad_R)) - kappa * rel.dot(c.frame.normal()) * R) / K.inradius;
}

Point FluxVariant2::evaluate(const Point& x) const { return base_gradient + tau_o(cone_of(x), x); }

Point FluxVariant2::evaluate_barycentric(const Vec& lambda) const {
  int best = 0;
  double best_h = lambda[0] * K.altitude(0);
  for (int i = 1; i <= K.dim; ++i) {
    const double h = lambda[i] * K.altitude(i);
    if (h < best_h) {
      best_h = h;
      best = i;
    }
  }
  return base_gradient + tau_o(best, K.from_barycentric(lambda), best_h);
}

double FluxVariant2::divergence(const Point& x) const { return divergence_o(cone_of(x), x); }

FluxVariant2 build_variant2(const SimplexGeometry& K, const Point& grad_uh, const Mat& R, double kappa) {
  if (!(kappa > 0.0)) throw InvalidVariant("the cone reconstruction needs kappa > 0");
  const int d = K.dim;
  FluxVariant2 v;
  v.K = K;
  v.base_gradient = grad_uh;
  v.kappa = kappa;
  v.cones.reserve(d + 1);
  for (int i = 0; i <= d; ++i) {
    FluxVariant2::Cone c;
    c.frame = local_facet_frame(K, i);
    c.base = facet_vertices(K, i);
    c.values.resize(d);
    const Point nu = c.frame.normal();
    c.grad_R = Point::Zero(d);
    for (int j = 0, p = 0; j <= d; ++j) {
      if (j == i) continue;
      c.values[p++] = R(i, j);
      const Point g = K.grad_lambda.col(j);
      c.grad_R += R(i, j) * (g - g.dot(nu) * nu);
    }
    c.centroid = c.base.rowwise().mean();
    v.cones.push_back(std::move(c));
  }
  return v;
}

// ---------------------------------------------------------------------------

ActiveRegion split_active_region(const Mat& base, const Point& apex, double height, double cut) {
  const int d = static_cast<int>(base.rows());
  ActiveRegion out;
  if (cut >= height) {
    Mat whole(d, d + 1);
    whole << base, apex;
    out.frustum.push_back(whole);
    Vec h = Vec::Zero(d + 1);
    h[d] = height;
    out.heights.push_back(h);
    return out;
  }
  const double s = cut / height;
  Mat top(d, d);
  for (int j = 0; j < d; ++j) top.col(j) = base.col(j) + s * (apex - base.col(j));
  for (int i = 0; i < d; ++i) {
    Mat piece(d, d + 1);
    Vec h = Vec::Zero(d + 1);
    for (int j = 0; j <= i; ++j) piece.col(j) = base.col(j);
    for (int j = i; j < d; ++j) {
      piece.col(j + 1) = top.col(j);
      h[j + 1] = cut;
    }
    out.frustum.push_back(piece);
    out.heights.push_back(h);
  }
  out.cap.resize(d, d + 1);
  out.cap << top, apex;
  return out;
}

// ---------------------------------------------------------------------------

ElementIndicator eta_variant1(const ElementFluxData& data, int degree) {
  const SimplexGeometry& K = data.K;
  const FluxVariant1 flux = build_variant1(K, data.grad_uh, data.R, data.grad_r);
  const QuadratureRule& rule = rule_for(K.dim, degree);
  const QuadratureRule& low = rule_for(K.dim, std::max(2, degree - 2));

  ElementIndicator ind;
  ind.variant = 1;
  const double flux_sq = integrate_on(K.vertices, K.volume, rule, [&](const Point& x) {
    const Vec l = K.barycentric(x);
    return (flux.tau_l(l) + flux.tau_q(l)).squaredNorm();
  });
  const double div_sq = integrate_on(K.vertices, K.volume, low, [&](const Point& x) {
    const double r = data.r_values.dot(K.barycentric(x));
    const double s = r + flux.divergence(x);
    return s * s;
  });
  ind.flux_norm = std::sqrt(std::max(0.0, flux_sq));
  ind.divergence_norm = std::sqrt(std::max(0.0, div_sq));
  ind.audit_scale = data.projected_source_norm + data.kappa * data.kappa * data.uh_norm + 1.0;

  if (small_reaction(data.kappa, K.inradius)) {
    if (ind.divergence_norm > kDivergenceAuditTolerance * ind.audit_scale)
      throw DivergenceAuditFailed(fmt::format("divergence residual {:.3e} exceeds {:.1e} x scale {:.3e}",
                                              ind.divergence_norm, kDivergenceAuditTolerance, ind.audit_scale));
    ind.eta = ind.flux_norm;
  } else {
    ind.divergence_included = true;
    ind.eta = std::sqrt(flux_sq + div_sq / (data.kappa * data.kappa));
  }
  return ind;
}

ElementIndicator eta_variant2(const ElementFluxData& data, int degree) {
  const SimplexGeometry& K = data.K;
  const FluxVariant2 flux = build_variant2(K, data.grad_uh, data.R, data.kappa);
  const QuadratureRule& rule = rule_for(K.dim, degree);
  const double cut = 1.0 / data.kappa;

  double flux_sq = 0.0, div_sq = 0.0;
  for (int i = 0; i <= K.dim; ++i) {
    const ActiveRegion region = split_active_region(flux.cones[i].base, K.incentre, K.inradius, cut);
    // Heights are interpolated from the piece vertices: recomputing them from
    // physical points would cost kappa * eps relative accuracy in the damping.
    for (std::size_t p = 0; p < region.frustum.size(); ++p) {
      const Mat& piece = region.frustum[p];
      const double scale = piece_volume(piece) * factorial(K.dim);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Point x = piece * rule.nodes[q];
        const double xd = region.heights[p].dot(rule.nodes[q]);
        const double s = data.r_values.dot(K.barycentric(x)) + flux.divergence_o(i, x, xd);
        flux_sq += rule.weights[q] * scale * flux.tau_o(i, x, xd).squaredNorm();
        div_sq += rule.weights[q] * scale * s * s;
      }
    }
    if (region.cap.cols() > 0)
      div_sq += integrate_piece(region.cap, rule, [&](const Point& x) {
        const double r = data.r_values.dot(K.barycentric(x));
        return r * r;
      });
  }
  ElementIndicator ind;
  ind.variant = 2;
  ind.flux_norm = std::sqrt(std::max(0.0, flux_sq));
  ind.divergence_norm = std::sqrt(std::max(0.0, div_sq));
  ind.divergence_included = true;
  ind.audit_scale = data.projected_source_norm + data.kappa * data.kappa * data.uh_norm + 1.0;
  ind.eta = std::sqrt(std::max(0.0, flux_sq) + std::max(0.0, div_sq) / (data.kappa * data.kappa));
  return ind;
}

// ---------------------------------------------------------------------------

ElementFlux build_element_flux(const ElementFluxData& data, int variant) {
  if (variant == 1) return build_variant1(data.K, data.grad_uh, data.R, data.grad_r);
  if (variant == 2) return build_variant2(data.K, data.grad_uh, data.R, data.kappa);
  throw InvalidVariant(fmt::format("unknown flux variant {}", variant));
}

Point evaluate(const ElementFlux& flux, const Point& x) {
  return std::visit([&](const auto& f) { return f.evaluate(x); }, flux);
}

Point evaluate_barycentric(const ElementFlux& flux, const Vec& lambda) {
  return std::visit([&](const auto& f) { return f.evaluate_barycentric(lambda); }, flux);
}

double divergence(const ElementFlux& flux, const Point& x) {
  return std::visit([&](const auto& f) { return f.divergence(x); }, flux);
}

double max_normal_trace_mismatch(const Mesh& mesh, const FemSolution& uh, const ProblemData& data,
                                 const EquilibratedFluxes& eq, const std::vector<int>& variant, Execution exec,
                                 bool relative) {
  const int d = mesh.dim();
  const QuadratureRule& rule = rule_for(d - 1, 4);
  std::vector<double> worst(mesh.num_facets(), 0.0);
  parallel_for(exec, mesh.num_facets(), [&](std::size_t fi) {
    const int f = static_cast<int>(fi);
    const Facet& facet = mesh.facet(f);
    if (!facet.interior()) return;
    const int ea = facet.side_a.element, eb = facet.side_b->element;
    const ElementFlux ta = build_element_flux(element_flux_data(mesh, ea, uh, data, eq), variant[ea]);
    const ElementFlux tb = build_element_flux(element_flux_data(mesh, eb, uh, data, eq), variant[eb]);
    const SimplexGeometry Ka = mesh.element_geometry(ea), Kb = mesh.element_geometry(eb);
    const Point na = Ka.outward_normal(facet.side_a.local), nb = Kb.outward_normal(facet.side_b->local);
    double scale = 1.0;
    if (relative) scale = std::max(1.0, eq.facet_values(mesh, f).cwiseAbs().maxCoeff());
    double w = 0.0;
    // Facet vertex p is element vertex p (p < local) or p + 1.
    auto lift = [d](const Vec& mu, int local) {
      Vec l = Vec::Zero(d + 1);
      for (int p = 0; p < d; ++p) l[p < local ? p : p + 1] = mu[p];
      return l;
    };
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec& mu = rule.nodes[q];
      const double a = evaluate_barycentric(ta, lift(mu, facet.side_a.local)).dot(na);
      const double b = evaluate_barycentric(tb, lift(mu, facet.side_b->local)).dot(nb);
      w = std::max(w, std::abs(a + b));
    }
    worst[fi] = w / scale;
  });
  return worst.empty() ? 0.0 : *std::max_element(worst.begin(), worst.end());
}

}  // namespace rdflux
