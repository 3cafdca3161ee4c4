// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"
#include "rdflux/quadrature.hpp"
#include "test_support.hpp"

#include <cmath>
#include <numeric>
#include <random>

using namespace rdflux;
using rdflux::testing::random_simplex;
using rdflux::testing::reference_simplex;

namespace {

// All exponent tuples of length n with total degree exactly k.
void exponents_of_degree(int n, int k, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == n - 1) {
    cur.push_back(k);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int a = 0; a <= k; ++a) {
    cur.push_back(a);
    exponents_of_degree(n, k - a, cur, out);
    cur.pop_back();
  }
}

double monomial(const Vec& l, const std::vector<int>& a) {
  double p = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) p *= std::pow(l[static_cast<Eigen::Index>(i)], a[i]);
  return p;
}

}  // namespace

TEST_CASE("weights sum to the reference volume") {
  for (int dim = 1; dim <= 5; ++dim) {
    double ref = 1.0;
    for (int i = 2; i <= dim; ++i) ref /= i;
    for (int degree = 1; degree <= kMaxQuadratureDegree; ++degree) {
      const QuadratureRule& r = rule_for(dim, degree);
      CHECK(r.degree >= degree);
      const double s = std::accumulate(r.weights.begin(), r.weights.end(), 0.0);
      CHECK(std::abs(s - ref) < 1e-12 * ref);
      for (const Vec& node : r.nodes) CHECK(std::abs(node.sum() - 1.0) < 1e-14);
    }
  }
}

TEST_CASE("unsupported degree") {
  CHECK_THROWS_AS(rule_for(3, kMaxQuadratureDegree + 1), UnsupportedDegree);
  CHECK_THROWS_AS(rule_for(3, -1), UnsupportedDegree);
}

TEST_CASE("rules are exact on barycentric monomials up to their degree") {
  for (int dim = 1; dim <= 4; ++dim)
    for (int degree : {1, 2, 4, 6, 8, 10}) {
      const QuadratureRule& r = rule_for(dim, degree);
      for (int k = 0; k <= degree; ++k) {
        std::vector<std::vector<int>> all;
        std::vector<int> cur;
        exponents_of_degree(dim + 1, k, cur, all);
        for (const auto& a : all) {
          double q = 0.0;
          for (std::size_t i = 0; i < r.size(); ++i) q += r.weights[i] * monomial(r.nodes[i], a);
          double fact = 1.0;
          for (int i = 2; i <= dim; ++i) fact *= i;
          const double exact = barycentric_monomial_integral(a, 1.0 / fact);
          CHECK(std::abs(q - exact) < 1e-11 * exact);
        }
      }
    }
}

TEST_CASE("monomial oracle values") {
  // int_T lambda_0 over the unit triangle = 1/6.
  CHECK(barycentric_monomial_integral({1, 0, 0}, 0.5) == doctest::Approx(1.0 / 6.0));
  // int_T lambda_0 lambda_1 over the unit triangle = 1/24.
  CHECK(barycentric_monomial_integral({1, 1, 0}, 0.5) == doctest::Approx(1.0 / 24.0));
  // int over a segment of length 2 of lambda_0^2 = 2/3.
  CHECK(barycentric_monomial_integral({2, 0}, 2.0) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("integration of Cartesian polynomials on random simplices") {
  std::mt19937 rng(3);
  for (int dim = 2; dim <= 4; ++dim)
    for (int trial = 0; trial < 5; ++trial) {
      const SimplexGeometry K = make_simplex_geometry(random_simplex(rng, dim));
      // p(x) = (a.x + b)^k is exactly a degree-k polynomial; the oracle
      // expands it in barycentric monomials through multinomial sums.
      Vec a(dim);
      for (int i = 0; i < dim; ++i) a[i] = std::uniform_real_distribution<double>(-1, 1)(rng);
      const double b = 0.3;
      for (int k = 0; k <= 6; ++k) {
        const auto p = [&](const Point& x) { return std::pow(a.dot(x) + b, k); };
        // a.x + b = sum_j c_j lambda_j with c_j = a.v_j + b.
        Vec c(dim + 1);
        for (int j = 0; j <= dim; ++j) c[j] = a.dot(K.vertex(j)) + b;
        std::vector<std::vector<int>> all;
        std::vector<int> cur;
        exponents_of_degree(dim + 1, k, cur, all);
        double exact = 0.0;
        for (const auto& e : all) {
          double coef = std::tgamma(k + 1.0);
          for (std::size_t j = 0; j < e.size(); ++j)
            coef *= std::pow(c[static_cast<Eigen::Index>(j)], e[j]) / std::tgamma(e[j] + 1.0);
          exact += coef * barycentric_monomial_integral(e, K.volume);
        }
        const double q = integrate(p, K, k);
        CHECK(std::abs(q - exact) <= 1e-11 * (std::abs(exact) + K.volume));
      }
    }
}

TEST_CASE("facet integration") {
  Mat seg(2, 2);
  seg << 0, 3, 0, 4;  // length 5
  CHECK(integrate_facet([](const Point&) { return 1.0; }, seg, 0) == doctest::Approx(5.0));
  CHECK(integrate_facet([](const Point& x) { return x[0]; }, seg, 1) == doctest::Approx(7.5));
  Mat tri(3, 3);
  tri << 0, 1, 0, 0, 0, 1, 2, 2, 2;  // unit right triangle at z = 2
  CHECK(integrate_facet([](const Point& x) { return x[0] * x[1]; }, tri, 2) == doctest::Approx(1.0 / 24.0));
  Mat pt(1, 1);
  pt << 0.25;
  CHECK(integrate_facet([](const Point& x) { return 4.0 * x[0]; }, pt, 3) == doctest::Approx(1.0));
}
