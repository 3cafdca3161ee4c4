// SPDX-License-Identifier: Apache-2.0
#include "rdflux/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace rdflux {
namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double max_edge(const Mat& vertices) {
  double h = 0.0;
  for (int i = 0; i < vertices.cols(); ++i)
    for (int j = i + 1; j < vertices.cols(); ++j)
      h = std::max(h, (vertices.col(i) - vertices.col(j)).norm());
  return h;
}

Mat edge_matrix(const Mat& vertices) {
  const int dim = static_cast<int>(vertices.rows());
  Mat edges(dim, vertices.cols() - 1);
  for (int j = 1; j < vertices.cols(); ++j) edges.col(j - 1) = vertices.col(j) - vertices.col(0);
  return edges;
}

void check_shape(const Mat& vertices) {
  if (vertices.rows() < 1 || vertices.rows() > kMaxDim || vertices.cols() != vertices.rows() + 1)
    throw DegenerateSimplex("simplex needs dim+1 vertices in dimension 1.." +
                            std::to_string(kMaxDim));
}

}  // namespace

double simplex_volume(const Mat& vertices) {
  check_shape(vertices);
  const int dim = static_cast<int>(vertices.rows());
  const double vol = std::abs(edge_matrix(vertices).determinant()) / factorial(dim);
  const double h = max_edge(vertices);
  if (!(vol >= 1e-14 * std::pow(h, dim)) || h == 0.0)
    throw DegenerateSimplex("degenerate simplex (volume " + std::to_string(vol) + ")");
  return vol;
}

Mat barycentric_gradients(const Mat& vertices) {
  simplex_volume(vertices);
  const int dim = static_cast<int>(vertices.rows());
  // Rows of J^{-1} are the gradients of lambda_1..lambda_dim.
  const Mat inv = edge_matrix(vertices).inverse();
  Mat grads(dim, dim + 1);
  grads.rightCols(dim) = inv.transpose();
  grads.col(0) = -grads.rightCols(dim).rowwise().sum();
  return grads;
}

double embedded_simplex_measure(const Mat& vertices) {
  const int k = static_cast<int>(vertices.cols()) - 1;
  if (k == 0) return 1.0;
  const Mat edges = edge_matrix(vertices);
  const double gram = (edges.transpose() * edges).determinant();
  return std::sqrt(std::max(gram, 0.0)) / factorial(k);
}

Vec SimplexGeometry::barycentric(const Point& x) const {
  Vec lambda = grad_lambda.transpose() * (x - vertices.col(0));
  lambda[0] += 1.0;
  return lambda;
}

SimplexGeometry make_simplex_geometry(const Mat& vertices) {
  SimplexGeometry g;
  g.dim = static_cast<int>(vertices.rows());
  g.vertices = vertices;
  g.volume = simplex_volume(vertices);
  g.grad_lambda = barycentric_gradients(vertices);
  g.facet_measure.resize(g.dim + 1);
  for (int i = 0; i <= g.dim; ++i)
    g.facet_measure[i] = g.dim * g.volume * g.grad_lambda.col(i).norm();
  g.diameter = max_edge(vertices);
  const double perimeter = g.facet_measure.sum();
  g.inradius = g.dim * g.volume / perimeter;
  g.incentre = vertices * g.facet_measure / perimeter;
  g.centroid = vertices.rowwise().mean();
  return g;
}

Mat facet_vertices(const SimplexGeometry& K, int facet) {
  Mat out(K.dim, K.dim);
  for (int j = 0, c = 0; j <= K.dim; ++j)
    if (j != facet) out.col(c++) = K.vertices.col(j);
  return out;
}

FacetFrame local_facet_frame(const SimplexGeometry& K, int facet) {
  const int dim = K.dim;
  const Mat fv = facet_vertices(K, facet);
  FacetFrame frame;
  frame.origin = fv.col(0);
  frame.axes.resize(dim, dim);
  const Point inward = K.grad_lambda.col(facet) / K.grad_lambda.col(facet).norm();
  if (dim > 1) {
    // Orthonormalise the facet edges against the normal (modified Gram-Schmidt).
    int c = 0;
    for (int j = 1; j < dim; ++j) {
      Point e = fv.col(j) - fv.col(0);
      e -= e.dot(inward) * inward;
      for (int k = 0; k < c; ++k) e -= e.dot(frame.axes.col(k)) * frame.axes.col(k);
      for (int k = 0; k < c; ++k) e -= e.dot(frame.axes.col(k)) * frame.axes.col(k);
      frame.axes.col(c++) = e / e.norm();
    }
  }
  frame.axes.col(dim - 1) = inward;
  return frame;
}

std::vector<Mat> subdivide_simplex(const Mat& vertices, int k) {
  const int d = static_cast<int>(vertices.rows());
  if (k <= 1) return {vertices};
  // In the coordinates y with x = v_0 + sum_i y_i (v_i - v_{i-1}) the simplex
  // is k >= y_1 >= ... >= y_d >= 0 (scaled by k). Kuhn simplices of the
  // lattice cubes that satisfy the ordering form the subdivision.
  auto point = [&](const std::vector<int>& y) {
    Point x = vertices.col(0);
    for (int i = 1; i <= d; ++i) x += (static_cast<double>(y[i - 1]) / k) * (vertices.col(i) - vertices.col(i - 1));
    return x;
  };
  auto inside = [&](const std::vector<int>& y) {
    if (y[0] > k || y[d - 1] < 0) return false;
    for (int i = 1; i < d; ++i)
      if (y[i] > y[i - 1]) return false;
    return true;
  };
  std::vector<Mat> out;
  std::vector<int> base(d, 0), perm(d);
  while (true) {
    std::iota(perm.begin(), perm.end(), 0);
    do {
      std::vector<int> y = base;
      Mat s(d, d + 1);
      bool ok = inside(y);
      s.col(0) = point(y);
      for (int j = 0; j < d && ok; ++j) {
        ++y[perm[j]];
        ok = inside(y);
        s.col(j + 1) = point(y);
      }
      if (ok) out.push_back(s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    int i = 0;
    while (i < d && ++base[i] == k) base[i++] = 0;
    if (i == d) break;
  }
  return out;
}

}  // namespace rdflux
