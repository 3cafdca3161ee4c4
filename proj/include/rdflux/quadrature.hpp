// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rdflux/geometry.hpp"
#include "rdflux/types.hpp"

#include <vector>

namespace rdflux {

inline constexpr int kMaxQuadratureDegree = 12;

/// Quadrature rule on the reference d-simplex. Nodes are barycentric tuples
/// (d+1 entries each); the weights sum to 1/d!.
struct QuadratureRule {
  int dim = 0;
  int degree = 0;
  std::vector<Vec> nodes;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

/// Grundmann-Moeller rule exact for polynomials of total degree <= `degree`.
/// Rules are built once and cached; the returned reference stays valid for
/// the lifetime of the program. Thread-safe.
const QuadratureRule& rule_for(int dim, int degree);

/// Integral of f over a simplex given by its vertex columns (dim x dim+1).
/// `measure` is the simplex volume.
template <class F>
double integrate_on(const Mat& vertices, double measure, const QuadratureRule& rule, F&& f) {
  double factorial = 1.0;
  for (int i = 2; i <= rule.dim; ++i) factorial *= i;
  double s = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * f(Point(vertices * rule.nodes[q]));
  return s * measure * factorial;
}

/// Integral of f over an element; exact for polynomial f of degree <= degree.
double integrate(const ScalarField& f, const SimplexGeometry& K, int degree);

/// Integral of f over a (dim-1)-simplex embedded in R^dim, given as vertex
/// columns (dim x dim).
double integrate_facet(const ScalarField& f, const Mat& facet_vertices, int degree);

/// Closed-form integral of prod_i lambda_i^{a_i} over a simplex of the given
/// measure and intrinsic dimension: k! |S| prod(a_i!) / (k + sum a_i)!.
double barycentric_monomial_integral(const std::vector<int>& exponents, double measure);

}  // namespace rdflux
