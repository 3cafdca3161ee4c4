// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rdflux/geometry.hpp"
#include "rdflux/types.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace rdflux {

enum class BoundaryTag { Dirichlet, Neumann };

/// One side of a facet: the element and the local index of the facet in it
/// (equal to the local index of the opposite vertex).
struct FacetSide {
  int element = -1;
  int local = -1;
};

struct Facet {
  std::array<int, kMaxDim> vertex_ids{};  // first dim entries used, ascending
  FacetSide side_a;                       // orientation +1
  std::optional<FacetSide> side_b;        // orientation -1, interior facets only
  std::optional<BoundaryTag> boundary;    // boundary facets only

  bool interior() const { return side_b.has_value(); }
  bool is_neumann() const { return boundary == BoundaryTag::Neumann; }
  bool is_dirichlet() const { return boundary == BoundaryTag::Dirichlet; }
  /// Orientation sign sigma_{K,facet}: +1 on side_a, -1 on side_b.
  int sign(int element) const { return element == side_a.element ? 1 : -1; }
};

/// Explicit boundary tag for one facet, as read from a mesh file.
struct BoundaryFacetSpec {
  std::vector<int> vertex_ids;
  BoundaryTag tag = BoundaryTag::Neumann;
};

using BoundaryRule = std::function<BoundaryTag(const Point& facet_centroid)>;

/// Immutable conforming simplicial mesh with facet adjacency, boundary tags
/// and a piecewise constant reaction coefficient.
class Mesh {
 public:
  /// Elements are given as flat (dim+1)-tuples of vertex ids; each tuple is
  /// sorted into canonical ascending order. Every boundary facet must be
  /// covered by `tags`.
  Mesh(int dim, std::vector<double> points, std::vector<int> cells, std::vector<double> kappa,
       const std::vector<BoundaryFacetSpec>& tags);
  Mesh(int dim, std::vector<double> points, std::vector<int> cells, std::vector<double> kappa,
       const BoundaryRule& rule);

  int dim() const { return dim_; }
  std::size_t num_vertices() const { return points_.size() / dim_; }
  std::size_t num_elements() const { return kappa_.size(); }
  std::size_t num_facets() const { return facets_.size(); }

  Point point(int v) const;
  std::span<const int> element(int e) const {
    return {cells_.data() + static_cast<std::size_t>(e) * (dim_ + 1),
            static_cast<std::size_t>(dim_ + 1)};
  }
  /// Facet ids of element e, indexed by the local vertex they are opposite to.
  std::span<const int> element_facets(int e) const {
    return {cell_facets_.data() + static_cast<std::size_t>(e) * (dim_ + 1),
            static_cast<std::size_t>(dim_ + 1)};
  }
  double kappa(int e) const { return kappa_[e]; }
  const std::vector<double>& kappa() const { return kappa_; }
  const Facet& facet(int f) const { return facets_[f]; }
  const std::vector<Facet>& facets() const { return facets_; }
  std::span<const int> facet_vertices(int f) const {
    return {facets_[f].vertex_ids.data(), static_cast<std::size_t>(dim_)};
  }
  /// Elements containing vertex v, ascending.
  std::span<const int> vertex_patch(int v) const {
    return {patch_ids_.data() + patch_offsets_[v],
            static_cast<std::size_t>(patch_offsets_[v + 1] - patch_offsets_[v])};
  }
  bool is_dirichlet_vertex(int v) const { return dirichlet_vertex_[v] != 0; }
  std::size_t num_free_vertices() const;

  Mat element_vertices(int e) const;
  SimplexGeometry element_geometry(int e) const { return make_simplex_geometry(element_vertices(e)); }
  Mat facet_coordinates(int f) const;
  Point facet_centroid(int f) const;
  const std::vector<double>& raw_points() const { return points_; }
  const std::vector<int>& raw_cells() const { return cells_; }

 private:
  Mesh(int dim, std::vector<double> points, std::vector<int> cells, std::vector<double> kappa);
  void build_adjacency();
  void build_patches();
  void check_hanging_vertices() const;
  void finish_boundary();

  int dim_;
  std::vector<double> points_;
  std::vector<int> cells_;
  std::vector<double> kappa_;
  std::vector<Facet> facets_;
  std::vector<int> cell_facets_;
  std::vector<int> patch_offsets_;
  std::vector<int> patch_ids_;
  std::vector<char> dirichlet_vertex_;
};

/// Structured mesh of (-1,1)^dim: M^dim subcubes, each split into dim!
/// simplices by the Kuhn (sort-based) triangulation. kappa is evaluated at
/// element centroids and boundary tags at facet centroids.
Mesh build_cube_mesh(int M, int dim, const ScalarField& kappa_fn, const BoundaryRule& rule);

/// Dirichlet on x_1 = +-1, Neumann elsewhere.
BoundaryRule dirichlet_on_x1_faces();

/// Vertices whose patch violates the kappa-jump assumption: the ratio
/// max/min kappa over the patch exceeds `threshold`, or min kappa is zero
/// and max kappa exceeds `threshold`.
std::vector<int> kappa_jump_vertices(const Mesh& mesh, double threshold = 100.0);

/// Text mesh format: DIM / POINTS / CELLS (ids + kappa) / BOUNDARY (ids + D|N).
Mesh read_mesh(std::istream& in);
void write_mesh(std::ostream& out, const Mesh& mesh);

}  // namespace rdflux
