// SPDX-License-Identifier: Apache-2.0
#include "rdflux/estimator.hpp"

#include "rdflux/quadrature.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace rdflux {

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Integral over a facet given as vertex columns; f receives the physical
// point and the facet barycentric coordinates.
template <class F>
double facet_integral(const Mat& fv, int degree, F&& f) {
  const int k = static_cast<int>(fv.cols()) - 1;
  const double measure = embedded_simplex_measure(fv);
  const QuadratureRule& rule = rule_for(k, std::min(degree, kMaxQuadratureDegree));
  double s = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * f(Point(fv * rule.nodes[q]), rule.nodes[q]);
  return s * measure * factorial(k);
}

double poincare_weight(double h, double kappa) {
  const double m = h / std::numbers::pi;
  return kappa > 0.0 ? std::min(m, 1.0 / kappa) : m;
}

}  // namespace

double TraceConstants::oscillation_constant() const {
  const double bar = std::sqrt(ctbar_sq);
  return ct_sq ? std::min(std::sqrt(*ct_sq), bar) : bar;
}

TraceConstants trace_constants(const SimplexGeometry& K, int facet, double kappa) {
  const double h = K.diameter;
  const double d = K.dim;
  const double ratio = K.facet_measure[facet] / (d * K.volume);
  TraceConstants c;
  if (kappa > 0.0) c.ct_sq = ratio / kappa * std::hypot(2.0 * h, d / kappa);
  const double m = poincare_weight(h, kappa);
  c.ctbar_sq = ratio * m * (2.0 * h + d * m);
  return c;
}

TraceRatios verify_trace_inequality(const SimplexGeometry& K, int facet, double kappa, int samples,
                                    std::mt19937_64& rng) {
  const int d = K.dim;
  const Mat fv = facet_vertices(K, facet);
  const double measure = K.facet_measure[facet];
  std::normal_distribution<double> normal(0.0, 1.0);
  TraceRatios out;
  for (int s = 0; s < samples; ++s) {
    // v(x) = c + b.y + y^T A y with y = (x - centroid) / h.
    const double c = normal(rng);
    Point b(d);
    Mat A(d, d);
    for (int i = 0; i < d; ++i) {
      b[i] = normal(rng);
      for (int j = 0; j < d; ++j) A(i, j) = normal(rng);
    }
    A = 0.5 * (A + A.transpose()).eval();
    const double h = K.diameter;
    auto value = [&](const Point& x) {
      const Point y = (x - K.centroid) / h;
      return c + b.dot(y) + y.dot(A * y);
    };
    auto gradient = [&](const Point& x) -> Point {
      const Point y = (x - K.centroid) / h;
      return (b + 2.0 * (A * y)) / h;
    };
    const double energy = integrate(
        [&](const Point& x) {
          const double v = value(x);
          return gradient(x).squaredNorm() + kappa * kappa * v * v;
        },
        K, 4);
    const double mean = facet_integral(fv, 2, [&](const Point& x, const Vec&) { return value(x); }) / measure;
    const double trace = facet_integral(fv, 4, [&](const Point& x, const Vec&) { return value(x) * value(x); });
    const double centred = facet_integral(fv, 4, [&](const Point& x, const Vec&) {
      const double v = value(x) - mean;
      return v * v;
    });
    if (!(energy > 0.0)) continue;
    if (kappa > 0.0) out.plain = std::max(out.plain, std::sqrt(std::max(0.0, trace) / energy));
    out.mean_free = std::max(out.mean_free, std::sqrt(std::max(0.0, centred) / energy));
  }
  return out;
}

double oscillation_f(const SimplexGeometry& K, double kappa, const ScalarField& f, int degree) {
  const Vec p = project_element(f, K, degree);
  const double sq = integrate(
      [&](const Point& x) {
        const double r = f(x) - p.dot(K.barycentric(x));
        return r * r;
      },
      K, std::min(degree, kMaxQuadratureDegree));
  return poincare_weight(K.diameter, kappa) * std::sqrt(std::max(0.0, sq));
}

double oscillation_gN(const SimplexGeometry& K, int facet, double kappa, const ScalarField& g, int degree) {
  const Mat fv = facet_vertices(K, facet);
  const Vec p = project_facet(g, fv, degree);
  const double sq = facet_integral(fv, degree, [&](const Point& x, const Vec& mu) {
    const double r = g(x) - p.dot(mu);
    return r * r;
  });
  return trace_constants(K, facet, kappa).oscillation_constant() * std::sqrt(std::max(0.0, sq));
}

// ---------------------------------------------------------------------------

std::optional<double> ErrorReport::ieff_tau() const {
  if (!eta_tau || !true_error || !(*true_error > 0.0)) return std::nullopt;
  return *eta_tau / *true_error;
}

std::optional<double> ErrorReport::ieff_taustar() const {
  if (!eta_taustar || !true_error || !(*true_error > 0.0)) return std::nullopt;
  return *eta_taustar / *true_error;
}

ErrorReport estimate(const Mesh& mesh, const FemSolution& uh, const ProblemData& data, const EquilibratedFluxes& eq,
                     Strategy strategy, const EstimateOptions& options) {
  const bool want_tau = strategy != Strategy::TauStar;
  const bool want_star = strategy != Strategy::Tau;
  const std::size_t ne = mesh.num_elements();

  ErrorReport report;
  report.strategy = strategy;
  report.elements.resize(ne);
  report.max_equilibration_ratio = eq.max_equilibration_ratio;

  parallel_for(options.exec, ne, [&](std::size_t ei) {
    const int e = static_cast<int>(ei);
    const ElementFluxData fd = element_flux_data(mesh, e, uh, data, eq);
    const double kappa = fd.kappa;
    const bool small = small_reaction(kappa, fd.K.inradius);
    ElementReport& rep = report.elements[ei];

    rep.osc_f = oscillation_f(fd.K, kappa, data.source, options.oscillation_degree);
    const auto facets = mesh.element_facets(e);
    for (int m = 0; m <= mesh.dim(); ++m)
      if (mesh.facet(facets[m]).is_neumann())
        rep.osc_gn += oscillation_gN(fd.K, m, kappa, data.neumann, options.oscillation_degree);

    const bool need1 = want_star || small;
    const bool need2 = kappa > 0.0 && (want_star || !small);
    if (need1) {
      const ElementIndicator ind = eta_variant1(fd);
      rep.eta_variant1 = ind.eta;
      if (small) rep.divergence_ratio = ind.divergence_norm / ind.audit_scale;
    }
    if (need2) rep.eta_variant2 = eta_variant2(fd).eta;
    if (want_tau) {
      rep.variant_tau = small ? 1 : 2;
      rep.eta_tau = small ? rep.eta_variant1 : rep.eta_variant2;
    }
    if (want_star) {
      const bool first = kappa == 0.0 || rep.eta_variant1 <= rep.eta_variant2;
      rep.variant_taustar = first ? 1 : 2;
      rep.eta_taustar = first ? rep.eta_variant1 : rep.eta_variant2;
    }
  });

  auto total = [&](auto pick) {
    return std::sqrt(blocked_sum(options.exec, ne, [&](std::size_t e) {
      const ElementReport& r = report.elements[e];
      const double t = pick(r) + r.osc_f + r.osc_gn;
      return t * t;
    }));
  };
  if (want_tau) report.eta_tau = total([](const ElementReport& r) { return r.eta_tau; });
  if (want_star) report.eta_taustar = total([](const ElementReport& r) { return r.eta_taustar; });
  report.osc_f = std::sqrt(blocked_sum(options.exec, ne, [&](std::size_t e) {
    return report.elements[e].osc_f * report.elements[e].osc_f;
  }));
  report.osc_gn = std::sqrt(blocked_sum(options.exec, ne, [&](std::size_t e) {
    return report.elements[e].osc_gn * report.elements[e].osc_gn;
  }));
  for (const ElementReport& r : report.elements)
    report.max_divergence_ratio = std::max(report.max_divergence_ratio, r.divergence_ratio);

  if (options.check_conformity) {
    std::vector<int> variant(ne);
    if (want_tau) {
      for (std::size_t e = 0; e < ne; ++e) variant[e] = report.elements[e].variant_tau;
      report.max_trace_mismatch = max_normal_trace_mismatch(mesh, uh, data, eq, variant, options.exec, true);
    }
    if (want_star) {
      for (std::size_t e = 0; e < ne; ++e) variant[e] = report.elements[e].variant_taustar;
      report.max_trace_mismatch = std::max(report.max_trace_mismatch,
                                           max_normal_trace_mismatch(mesh, uh, data, eq, variant, options.exec, true));
    }
  }
  return report;
}

ErrorReport estimate(const Mesh& mesh, const FemSolution& uh, const ProblemData& data, Strategy strategy,
                     const EstimateOptions& options) {
  const EquilibratedFluxes eq = equilibrate(mesh, uh, data, options.exec);
  return estimate(mesh, uh, data, eq, strategy, options);
}

// ---------------------------------------------------------------------------

TrueError true_error(const Mesh& mesh, const FemSolution& uh, const ProblemData& data, const ExactSolution& exact,
                     int subdivision, int degree, Execution exec, bool quadrature_route) {
  TrueError out;
  if (quadrature_route) {
    const QuadratureRule& rule = rule_for(mesh.dim(), degree);
    const double pieces = std::pow(static_cast<double>(std::max(1, subdivision)), mesh.dim());
    const double sq = blocked_sum(exec, mesh.num_elements(), [&](std::size_t ei) {
      const int e = static_cast<int>(ei);
      const SimplexGeometry K = mesh.element_geometry(e);
      const Vec u = uh.element_values(mesh, e);
      const Point grad = uh.gradient(e);
      const double k2 = mesh.kappa(e) * mesh.kappa(e);
      double s = 0.0;
      for (const Mat& piece : subdivide_simplex(K.vertices, subdivision))
        s += integrate_on(piece, K.volume / pieces, rule, [&](const Point& x) {
          const double diff = exact.value(x) - u.dot(K.barycentric(x));
          return (exact.gradient(x) - grad).squaredNorm() + k2 * diff * diff;
        });
      return s;
    });
    out.quadrature = std::sqrt(std::max(0.0, sq));
  }
  if (exact.energy_sq) {
    const double e2 = *exact.energy_sq;
    const double radicand = e2 - 2.0 * linear_form(mesh, data, uh, exec) + bilinear_form(mesh, uh, uh, exec);
    if (radicand < -1e-12 * std::max(1.0, e2))
      throw NegativeDifference(fmt::format("|||u|||^2 - 2F(u_h) + B(u_h,u_h) = {:.6e} is negative", radicand));
    out.identity = std::sqrt(std::max(0.0, radicand));
  }
  return out;
}

// ---------------------------------------------------------------------------

void write_json(std::ostream& out, const ErrorReport& report) {
  using nlohmann::json;
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j;
  j["strategy"] = report.strategy == Strategy::Tau ? "tau" : report.strategy == Strategy::TauStar ? "taustar" : "both";
  j["eta_tau"] = opt(report.eta_tau);
  j["eta_taustar"] = opt(report.eta_taustar);
  j["osc_f"] = report.osc_f;
  j["osc_gn"] = report.osc_gn;
  j["true_error"] = opt(report.true_error);
  j["true_error_quadrature"] = opt(report.true_error_quadrature);
  j["ieff_tau"] = opt(report.ieff_tau());
  j["ieff_taustar"] = opt(report.ieff_taustar());
  j["audits"] = {{"max_equilibration_ratio", report.max_equilibration_ratio},
                 {"max_divergence_ratio", report.max_divergence_ratio},
                 {"max_trace_mismatch", report.max_trace_mismatch}};
  json elements = json::array();
  for (const ElementReport& r : report.elements) {
    elements.push_back({{"variant_tau", r.variant_tau},
                        {"variant_taustar", r.variant_taustar},
                        {"eta_tau", r.eta_tau},
                        {"eta_taustar", r.eta_taustar},
                        {"eta_variant1", r.eta_variant1},
                        {"eta_variant2", r.eta_variant2},
                        {"osc_f", r.osc_f},
                        {"osc_gn", r.osc_gn}});
  }
  j["elements"] = std::move(elements);
  out << j.dump(2) << '\n';
}

}  // namespace rdflux
