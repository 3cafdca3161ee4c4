// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"
#include "rdflux/geometry.hpp"
#include "test_support.hpp"

#include <cmath>
#include <random>

using namespace rdflux;
using rdflux::testing::random_simplex;
using rdflux::testing::reference_simplex;

TEST_CASE("simplex volume of reference and scaled simplices") {
  CHECK(simplex_volume(reference_simplex(3)) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(simplex_volume(reference_simplex(2)) == doctest::Approx(0.5).epsilon(1e-15));
  Mat t(2, 3);
  t << 0, 2, 0, 0, 0, 2;
  CHECK(simplex_volume(t) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("degenerate simplices are rejected") {
  Mat flat(2, 3);
  flat << 0, 1, 2, 0, 1, 2;
  CHECK_THROWS_AS(simplex_volume(flat), DegenerateSimplex);
  CHECK_THROWS_AS(make_simplex_geometry(flat), DegenerateSimplex);
  Mat sliver(2, 3);
  sliver << 0, 1, 0.5, 0, 0, 1e-15;
  CHECK_THROWS_AS(barycentric_gradients(sliver), DegenerateSimplex);
}

TEST_CASE("barycentric gradients of the unit triangle") {
  const Mat g = barycentric_gradients(reference_simplex(2));
  CHECK(g(0, 0) == doctest::Approx(-1.0));
  CHECK(g(1, 0) == doctest::Approx(-1.0));
  CHECK(g(0, 1) == doctest::Approx(1.0));
  CHECK(g(1, 1) == doctest::Approx(0.0));
  CHECK(g(0, 2) == doctest::Approx(0.0));
  CHECK(g(1, 2) == doctest::Approx(1.0));
}

TEST_CASE("barycentric identities on random simplices") {
  std::mt19937 rng(17);
  for (int dim = 2; dim <= 5; ++dim) {
    for (int trial = 0; trial < 20; ++trial) {
      const SimplexGeometry K = make_simplex_geometry(random_simplex(rng, dim));
      // Partition of unity and nodal property.
      CHECK(K.grad_lambda.rowwise().sum().norm() < 1e-12 * K.grad_lambda.norm());
      for (int n = 0; n <= dim; ++n) {
        const Vec l = K.barycentric(K.vertex(n));
        for (int m = 0; m <= dim; ++m) CHECK(std::abs(l[m] - (m == n ? 1.0 : 0.0)) < 1e-12);
      }
      // d|K||grad lambda_m| equals the facet measure from the Gram determinant.
      for (int m = 0; m <= dim; ++m) {
        const double gram = embedded_simplex_measure(facet_vertices(K, m));
        CHECK(std::abs(dim * K.volume * K.grad_lambda.col(m).norm() - gram) <= 1e-12 * gram);
      }
    }
  }
}

TEST_CASE("geometric quantities of the unit triangle") {
  const SimplexGeometry K = make_simplex_geometry(reference_simplex(2));
  CHECK(K.diameter == doctest::Approx(std::sqrt(2.0)));
  CHECK(K.inradius == doctest::Approx(1.0 / (2.0 + std::sqrt(2.0))).epsilon(1e-14));
  CHECK(K.inradius == doctest::Approx(0.29289321881345).epsilon(1e-12));
  // Facet 0 (opposite the origin) is the hypotenuse.
  CHECK(K.facet_measure[0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(K.altitude(0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("regular simplex has incentre at the centroid") {
  Mat v(2, 3);
  v << 0, 1, 0.5, 0, 0, std::sqrt(3.0) / 2.0;
  const SimplexGeometry K = make_simplex_geometry(v);
  CHECK((K.incentre - K.centroid).norm() < 1e-14);
  Mat t(3, 4);
  t << 1, 1, -1, -1, 1, -1, 1, -1, 1, -1, -1, 1;
  const SimplexGeometry T = make_simplex_geometry(t);
  CHECK((T.incentre - T.centroid).norm() < 1e-14);
}

TEST_CASE("incentre is at distance rho from every facet plane") {
  std::mt19937 rng(5);
  for (int dim = 2; dim <= 5; ++dim)
    for (int trial = 0; trial < 20; ++trial) {
      const SimplexGeometry K = make_simplex_geometry(random_simplex(rng, dim));
      for (int f = 0; f <= dim; ++f) {
        const FacetFrame frame = local_facet_frame(K, f);
        CHECK(std::abs(frame.height(K.incentre) - K.inradius) <= 1e-12 * K.inradius);
      }
    }
}

TEST_CASE("local facet frame") {
  SUBCASE("unit triangle, facet on the x axis") {
    const SimplexGeometry K = make_simplex_geometry(reference_simplex(2));
    const FacetFrame frame = local_facet_frame(K, 2);  // opposite (0,1)
    CHECK(frame.normal()[0] == doctest::Approx(0.0));
    CHECK(frame.normal()[1] == doctest::Approx(1.0));
    CHECK(frame.height(K.vertex(2)) == doctest::Approx(1.0));
  }
  SUBCASE("orthonormal, inward, zero on the facet") {
    std::mt19937 rng(11);
    for (int dim = 2; dim <= 5; ++dim) {
      const SimplexGeometry K = make_simplex_geometry(random_simplex(rng, dim));
      for (int f = 0; f <= dim; ++f) {
        const FacetFrame frame = local_facet_frame(K, f);
        const Mat gram = frame.axes.transpose() * frame.axes;
        CHECK((gram - Mat::Identity(dim, dim)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(frame.height(K.vertex(f)) > 0.0);
        CHECK(std::abs(frame.height(K.vertex(f)) - K.altitude(f)) < 1e-12 * K.altitude(f));
        for (int j = 0; j <= dim; ++j)
          if (j != f) CHECK(std::abs(frame.height(K.vertex(j))) < 1e-12 * K.diameter);
      }
    }
  }
}

TEST_CASE("Freudenthal subdivision") {
  std::mt19937 rng(23);
  for (int dim = 2; dim <= 4; ++dim)
    for (int k = 1; k <= 4; ++k) {
      const Mat v = random_simplex(rng, dim);
      const double vol = simplex_volume(v);
      const std::vector<Mat> pieces = subdivide_simplex(v, k);
      CHECK(static_cast<double>(pieces.size()) == std::pow(k, dim));
      double sum = 0.0;
      for (const Mat& p : pieces) {
        const double pv = simplex_volume(p);
        CHECK(pv == doctest::Approx(vol / std::pow(k, dim)).epsilon(1e-10));
        sum += pv;
        // Every piece vertex lies in the parent simplex.
        const SimplexGeometry K = make_simplex_geometry(v);
        for (int c = 0; c <= dim; ++c) CHECK(K.barycentric(p.col(c)).minCoeff() >= -1e-12);
      }
      CHECK(sum == doctest::Approx(vol).epsilon(1e-12));
    }
}
