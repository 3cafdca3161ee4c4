// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rdflux/fem.hpp"
#include "rdflux/geometry.hpp"
#include "rdflux/mesh.hpp"

#include <cmath>
#include <random>

namespace rdflux::testing {

/// Reference simplex (0, e_1, ..., e_d).
inline Mat reference_simplex(int dim) {
  Mat v = Mat::Zero(dim, dim + 1);
  for (int i = 0; i < dim; ++i) v(i, i + 1) = 1.0;
  return v;
}

/// Random simplex with reasonable shape (h / rho bounded).
inline Mat random_simplex(std::mt19937& rng, int dim, double max_aspect = 12.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (true) {
    Mat v(dim, dim + 1);
    for (int j = 0; j <= dim; ++j)
      for (int i = 0; i < dim; ++i) v(i, j) = u(rng);
    try {
      const SimplexGeometry g = make_simplex_geometry(v);
      if (g.diameter / g.inradius < max_aspect * dim) return v;
    } catch (const DegenerateSimplex&) {
    }
  }
}

/// Cube benchmark mesh: kappa1 for x_1 < 0, kappa2 otherwise.
inline Mesh benchmark_mesh(int M, int dim, double k1, double k2) {
  return build_cube_mesh(M, dim, [=](const Point& c) { return c[0] < 0 ? k1 : k2; }, dirichlet_on_x1_faces());
}

inline ProblemData constant_source(double f) {
  ProblemData data;
  data.source = [f](const Point&) { return f; };
  return data;
}

inline Point random_point_in(std::mt19937& rng, const SimplexGeometry& K) {
  std::exponential_distribution<double> e(1.0);
  Vec l(K.dim + 1);
  for (int i = 0; i <= K.dim; ++i) l[i] = e(rng);
  l /= l.sum();
  return K.from_barycentric(l);
}

inline double rel_diff(double a, double b) {
  const double s = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / s;
}

/// Cube mesh of (-1,1)^dim with the interior vertices randomly jittered,
/// random per-element kappa drawn from `kappas`, and random D/N tags on the
/// boundary (at least one Dirichlet face unless `allow_pure_neumann`).
inline Mesh random_small_mesh(std::mt19937& rng, int dim, int M, const std::vector<double>& kappas,
                              bool allow_pure_neumann = false) {
  const Mesh base = build_cube_mesh(M, dim, [](const Point&) { return 1.0; }, dirichlet_on_x1_faces());
  std::vector<double> pts = base.raw_points();
  std::uniform_real_distribution<double> jitter(-0.15 / M, 0.15 / M);
  for (std::size_t v = 0; v < base.num_vertices(); ++v) {
    bool interior = true;
    for (int k = 0; k < dim; ++k) interior &= std::abs(std::abs(pts[v * dim + k]) - 1.0) > 1e-12;
    if (!interior) continue;
    for (int k = 0; k < dim; ++k) pts[v * dim + k] += jitter(rng);
  }
  std::uniform_int_distribution<std::size_t> pick(0, kappas.size() - 1);
  std::vector<double> kappa(base.num_elements());
  for (double& k : kappa) k = kappas[pick(rng)];
  // Each of the 2*dim cube faces gets a random tag.
  std::bernoulli_distribution coin(0.5);
  std::vector<BoundaryTag> face_tag(2 * dim);
  for (auto& t : face_tag) t = coin(rng) ? BoundaryTag::Dirichlet : BoundaryTag::Neumann;
  if (!allow_pure_neumann) face_tag[0] = BoundaryTag::Dirichlet;
  BoundaryRule rule = [=](const Point& c) {
    for (int k = 0; k < dim; ++k) {
      if (std::abs(c[k] + 1.0) < 1e-12) return face_tag[2 * k];
      if (std::abs(c[k] - 1.0) < 1e-12) return face_tag[2 * k + 1];
    }
    return BoundaryTag::Neumann;
  };
  return Mesh(dim, std::move(pts), base.raw_cells(), std::move(kappa), rule);
}

}  // namespace rdflux::testing
