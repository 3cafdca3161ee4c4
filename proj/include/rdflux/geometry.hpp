// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rdflux/types.hpp"

#include <vector>

namespace rdflux {

/// Volume of the simplex spanned by the columns of `vertices` (dim x dim+1).
/// Throws DegenerateSimplex when the volume falls below 1e-14 * h^dim.
double simplex_volume(const Mat& vertices);

/// Gradients of the barycentric coordinates, one column per vertex.
Mat barycentric_gradients(const Mat& vertices);

/// (k)-dimensional measure of a k-simplex embedded in R^dim, given as
/// dim x (k+1) vertex columns. Uses the Gram determinant, so it is
/// independent of the barycentric-gradient route.
double embedded_simplex_measure(const Mat& vertices);

/// All geometric data the estimator needs for one element. Facet i is the
/// facet opposite vertex i.
struct SimplexGeometry {
  int dim = 0;
  Mat vertices;       // dim x (dim+1)
  Mat grad_lambda;    // dim x (dim+1)
  Vec facet_measure;  // dim+1
  double volume = 0.0;
  double diameter = 0.0;
  double inradius = 0.0;
  Point incentre;
  Point centroid;

  int num_vertices() const { return dim + 1; }
  Point vertex(int i) const { return vertices.col(i); }
  /// Distance from vertex i to the plane of facet i.
  double altitude(int i) const { return dim * volume / facet_measure[i]; }
  Point outward_normal(int i) const { return -grad_lambda.col(i) / grad_lambda.col(i).norm(); }
  Vec barycentric(const Point& x) const;
  Point from_barycentric(const Vec& lambda) const { return vertices * lambda; }
};

SimplexGeometry make_simplex_geometry(const Mat& vertices);

/// Orthonormal frame attached to facet `facet` of K: columns 0..dim-2 span
/// the facet plane, column dim-1 is the inward unit normal. `origin` lies on
/// the facet.
struct FacetFrame {
  Mat axes;
  Point origin;

  int dim() const { return static_cast<int>(axes.cols()); }
  Point normal() const { return axes.col(dim() - 1); }
  /// Signed distance from the facet plane, positive inside K.
  double height(const Point& x) const { return (x - origin).dot(normal()); }
  /// Local coordinates (x_1, ..., x_dim) of a physical point.
  Vec local(const Point& x) const { return axes.transpose() * (x - origin); }
};

FacetFrame local_facet_frame(const SimplexGeometry& K, int facet);

/// Vertex columns of facet `facet` of K (the remaining dim vertices, in
/// ascending local order).
Mat facet_vertices(const SimplexGeometry& K, int facet);

/// Freudenthal subdivision of a simplex into k^dim congruent-volume
/// simplices (vertex columns each).
std::vector<Mat> subdivide_simplex(const Mat& vertices, int k);

}  // namespace rdflux
