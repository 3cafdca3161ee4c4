// SPDX-License-Identifier: Apache-2.0
#include "rdflux/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace rdflux {
namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Calls visit(beta) for every beta in N^parts with |beta| == total.
template <class Visit>
void for_each_composition(int parts, int total, std::vector<int>& beta, int pos, Visit&& visit) {
  if (pos == parts - 1) {
    beta[pos] = total;
    visit(beta);
    return;
  }
  for (int b = total; b >= 0; --b) {
    beta[pos] = b;
    for_each_composition(parts, total - b, beta, pos + 1, visit);
  }
}

QuadratureRule grundmann_moeller(int dim, int s) {
  QuadratureRule rule;
  rule.dim = dim;
  rule.degree = 2 * s + 1;
  const int d = 2 * s + 1;
  for (int i = 0; i <= s; ++i) {
    const double denom = d + dim - 2 * i;
    double w = std::pow(2.0, -2 * s) * std::pow(denom, d) / factorial(i) / factorial(d + dim - i);
    if (i % 2 == 1) w = -w;
    std::vector<int> beta(dim + 1);
    for_each_composition(dim + 1, s - i, beta, 0, [&](const std::vector<int>& b) {
      Vec node(dim + 1);
      for (int j = 0; j <= dim; ++j) node[j] = (2.0 * b[j] + 1.0) / denom;
      rule.nodes.push_back(node);
      rule.weights.push_back(w);
    });
  }
  return rule;
}

}  // namespace

const QuadratureRule& rule_for(int dim, int degree) {
  if (degree < 0 || degree > kMaxQuadratureDegree)
    throw UnsupportedDegree("quadrature degree " + std::to_string(degree) +
                            " outside [0, " + std::to_string(kMaxQuadratureDegree) + "]");
  if (dim < 1 || dim > kMaxDim)
    throw UnsupportedDegree("quadrature dimension " + std::to_string(dim) + " unsupported");
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<QuadratureRule>> cache;
  const int s = degree / 2;
  std::lock_guard lock(mutex);
  auto& slot = cache[{dim, s}];
  if (!slot) slot = std::make_unique<QuadratureRule>(grundmann_moeller(dim, s));
  return *slot;
}

double integrate(const ScalarField& f, const SimplexGeometry& K, int degree) {
  return integrate_on(K.vertices, K.volume, rule_for(K.dim, degree), f);
}

double integrate_facet(const ScalarField& f, const Mat& facet_vertices, int degree) {
  const int k = static_cast<int>(facet_vertices.cols()) - 1;
  const double measure = embedded_simplex_measure(facet_vertices);
  if (k == 0) return f(Point(facet_vertices.col(0)));
  return integrate_on(facet_vertices, measure, rule_for(k, degree), f);
}

double barycentric_monomial_integral(const std::vector<int>& exponents, double measure) {
  const int k = static_cast<int>(exponents.size()) - 1;
  int total = 0;
  double num = factorial(k) * measure;
  for (int a : exponents) {
    total += a;
    num *= factorial(a);
  }
  return num / factorial(k + total);
}

}  // namespace rdflux
