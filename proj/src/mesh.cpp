// SPDX-License-Identifier: Apache-2.0
#include "rdflux/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <unordered_map>

namespace rdflux {
namespace {

using FacetKey = std::array<int, kMaxDim>;

struct FacetEntry {
  FacetKey key;
  int element;
  int local;
};

FacetKey make_key(std::span<const int> ids) {
  FacetKey key;
  key.fill(-1);
  std::copy(ids.begin(), ids.end(), key.begin());
  std::sort(key.begin(), key.begin() + static_cast<long>(ids.size()));
  return key;
}

}  // namespace

Mesh::Mesh(int dim, std::vector<double> points, std::vector<int> cells, std::vector<double> kappa)
    : dim_(dim), points_(std::move(points)), cells_(std::move(cells)), kappa_(std::move(kappa)) {
  if (dim_ < 2 || dim_ > kMaxDim)
    throw MeshFormatError("mesh dimension must be in [2, " + std::to_string(kMaxDim) + "]");
  if (points_.size() % dim_ != 0) throw MeshFormatError("point array size not a multiple of dim");
  const std::size_t nv = static_cast<std::size_t>(dim_) + 1;
  if (cells_.size() != kappa_.size() * nv)
    throw MeshFormatError("cell array does not match number of kappa values");
  if (kappa_.empty()) throw MeshFormatError("mesh has no elements");
  const int npts = static_cast<int>(num_vertices());
  for (std::size_t e = 0; e < kappa_.size(); ++e) {
    auto first = cells_.begin() + static_cast<long>(e * nv);
    std::sort(first, first + static_cast<long>(nv));
    for (std::size_t i = 0; i < nv; ++i) {
      const int v = first[static_cast<long>(i)];
      if (v < 0 || v >= npts) throw MeshFormatError("vertex id out of range in element " + std::to_string(e));
      if (i > 0 && v == first[static_cast<long>(i - 1)])
        throw DegenerateSimplex("repeated vertex in element " + std::to_string(e));
    }
    if (!(kappa_[e] >= 0.0) || !std::isfinite(kappa_[e]))
      throw MeshFormatError("kappa must be finite and nonnegative (element " + std::to_string(e) + ")");
    simplex_volume(element_vertices(static_cast<int>(e)));
  }
  build_adjacency();
  build_patches();
}

Mesh::Mesh(int dim, std::vector<double> points, std::vector<int> cells, std::vector<double> kappa,
           const std::vector<BoundaryFacetSpec>& tags)
    : Mesh(dim, std::move(points), std::move(cells), std::move(kappa)) {
  std::map<FacetKey, int> index;
  for (std::size_t f = 0; f < facets_.size(); ++f) index.emplace(facets_[f].vertex_ids, static_cast<int>(f));
  for (const auto& spec : tags) {
    if (static_cast<int>(spec.vertex_ids.size()) != dim_)
      throw MeshFormatError("boundary facet needs " + std::to_string(dim_) + " vertex ids");
    auto it = index.find(make_key(spec.vertex_ids));
    if (it == index.end()) throw MeshFormatError("boundary tag refers to a facet not in the mesh");
    Facet& facet = facets_[it->second];
    if (facet.interior()) throw MeshFormatError("boundary tag on an interior facet");
    facet.boundary = spec.tag;
  }
  finish_boundary();
}

Mesh::Mesh(int dim, std::vector<double> points, std::vector<int> cells, std::vector<double> kappa,
           const BoundaryRule& rule)
    : Mesh(dim, std::move(points), std::move(cells), std::move(kappa)) {
  for (std::size_t f = 0; f < facets_.size(); ++f)
    if (!facets_[f].interior()) facets_[f].boundary = rule(facet_centroid(static_cast<int>(f)));
  finish_boundary();
}

void Mesh::build_adjacency() {
  const int nv = dim_ + 1;
  const std::size_t ne = num_elements();
  std::vector<FacetEntry> entries;
  entries.reserve(ne * nv);
  for (std::size_t e = 0; e < ne; ++e) {
    auto ids = element(static_cast<int>(e));
    for (int i = 0; i < nv; ++i) {
      FacetKey key;
      key.fill(-1);
      for (int j = 0, c = 0; j < nv; ++j)
        if (j != i) key[c++] = ids[j];
      entries.push_back({key, static_cast<int>(e), i});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const FacetEntry& a, const FacetEntry& b) {
    return a.key != b.key ? a.key < b.key : a.element < b.element;
  });
  cell_facets_.assign(ne * nv, -1);
  for (std::size_t i = 0; i < entries.size();) {
    std::size_t j = i + 1;
    while (j < entries.size() && entries[j].key == entries[i].key) ++j;
    if (j - i > 2)
      throw NonConformingMesh("facet shared by " + std::to_string(j - i) + " elements");
    Facet facet;
    facet.vertex_ids = entries[i].key;
    facet.side_a = {entries[i].element, entries[i].local};
    if (j - i == 2) facet.side_b = FacetSide{entries[i + 1].element, entries[i + 1].local};
    const int id = static_cast<int>(facets_.size());
    for (std::size_t k = i; k < j; ++k)
      cell_facets_[static_cast<std::size_t>(entries[k].element) * nv + entries[k].local] = id;
    facets_.push_back(facet);
    i = j;
  }
  check_hanging_vertices();
}

void Mesh::build_patches() {
  const std::size_t nvert = num_vertices();
  patch_offsets_.assign(nvert + 1, 0);
  for (int v : cells_) ++patch_offsets_[v + 1];
  std::partial_sum(patch_offsets_.begin(), patch_offsets_.end(), patch_offsets_.begin());
  patch_ids_.assign(cells_.size(), -1);
  std::vector<int> fill(patch_offsets_.begin(), patch_offsets_.end() - 1);
  const int nv = dim_ + 1;
  for (std::size_t e = 0; e < num_elements(); ++e)
    for (int i = 0; i < nv; ++i) patch_ids_[fill[cells_[e * nv + i]]++] = static_cast<int>(e);
}

// A hanging vertex makes two geometrically overlapping facets look like
// boundary facets. Detect any mesh vertex lying on a boundary facet that it
// does not belong to.
void Mesh::check_hanging_vertices() const {
  std::vector<int> boundary;
  double size = 0.0;
  for (std::size_t f = 0; f < facets_.size(); ++f) {
    if (facets_[f].interior()) continue;
    boundary.push_back(static_cast<int>(f));
    const Mat c = facet_coordinates(static_cast<int>(f));
    for (int i = 1; i < c.cols(); ++i) size = std::max(size, (c.col(i) - c.col(0)).norm());
  }
  if (boundary.empty() || size == 0.0) return;

  std::vector<char> on_boundary(num_vertices(), 0);
  for (int f : boundary)
    for (int v : facet_vertices(f)) on_boundary[v] = 1;

  auto cell_of = [&](const Point& x) {
    std::array<long long, kMaxDim> c{};
    for (int k = 0; k < dim_; ++k) c[k] = static_cast<long long>(std::floor(x[k] / size));
    return c;
  };
  struct Hash {
    std::size_t operator()(const std::array<long long, kMaxDim>& a) const {
      std::size_t h = 0;
      for (long long v : a) h = h * 1000003u ^ static_cast<std::size_t>(v);
      return h;
    }
  };
  std::unordered_map<std::array<long long, kMaxDim>, std::vector<int>, Hash> grid;
  for (std::size_t v = 0; v < num_vertices(); ++v)
    if (on_boundary[v]) grid[cell_of(point(static_cast<int>(v)))].push_back(static_cast<int>(v));

  for (int f : boundary) {
    const Mat c = facet_coordinates(f);
    Point lo = c.rowwise().minCoeff(), hi = c.rowwise().maxCoeff();
    const auto clo = cell_of(lo), chi = cell_of(hi);
    // Local affine chart of the facet: x = c0 + E t, t barycentric tail.
    Mat edges(dim_, dim_ - 1);
    for (int i = 1; i < dim_; ++i) edges.col(i - 1) = c.col(i) - c.col(0);
    const Mat pinv = (edges.transpose() * edges).inverse() * edges.transpose();
    const auto own = facet_vertices(f);
    std::array<long long, kMaxDim> idx = clo;
    while (true) {
      auto it = grid.find(idx);
      if (it != grid.end()) {
        for (int v : it->second) {
          if (std::find(own.begin(), own.end(), v) != own.end()) continue;
          const Point x = point(v);
          const Vec t = pinv * (x - c.col(0));
          const double off = (x - c.col(0) - edges * t).norm();
          const double tol = 1e-10;
          if (off > tol * size) continue;
          if (t.minCoeff() >= -tol && t.sum() <= 1.0 + tol)
            throw NonConformingMesh("vertex " + std::to_string(v) + " hangs on boundary facet " +
                                    std::to_string(f));
        }
      }
      int k = 0;
      while (k < dim_ && ++idx[k] > chi[k]) idx[k] = clo[k], ++k;
      if (k == dim_) break;
    }
  }
}

void Mesh::finish_boundary() {
  dirichlet_vertex_.assign(num_vertices(), 0);
  for (const Facet& f : facets_) {
    if (f.interior()) continue;
    if (!f.boundary) throw MeshFormatError("boundary facet without a D/N tag");
    if (f.is_dirichlet())
      for (int k = 0; k < dim_; ++k) dirichlet_vertex_[f.vertex_ids[k]] = 1;
  }
}

std::size_t Mesh::num_free_vertices() const {
  return static_cast<std::size_t>(std::count(dirichlet_vertex_.begin(), dirichlet_vertex_.end(), 0));
}

Point Mesh::point(int v) const {
  Point p(dim_);
  for (int k = 0; k < dim_; ++k) p[k] = points_[static_cast<std::size_t>(v) * dim_ + k];
  return p;
}

Mat Mesh::element_vertices(int e) const {
  Mat m(dim_, dim_ + 1);
  auto ids = element(e);
  for (int i = 0; i <= dim_; ++i) m.col(i) = point(ids[i]);
  return m;
}

Mat Mesh::facet_coordinates(int f) const {
  Mat m(dim_, dim_);
  for (int i = 0; i < dim_; ++i) m.col(i) = point(facets_[f].vertex_ids[i]);
  return m;
}

Point Mesh::facet_centroid(int f) const { return facet_coordinates(f).rowwise().mean(); }

Mesh build_cube_mesh(int M, int dim, const ScalarField& kappa_fn, const BoundaryRule& rule) {
  if (M < 1) throw ConfigError("cube mesh needs M >= 1");
  if (dim < 2 || dim > kMaxDim) throw ConfigError("cube mesh dimension out of range");
  const int n1 = M + 1;
  std::vector<long long> stride(dim, 1);
  for (int k = 1; k < dim; ++k) stride[k] = stride[k - 1] * n1;
  const long long nverts = stride[dim - 1] * n1;

  std::vector<double> points(static_cast<std::size_t>(nverts * dim));
  for (long long v = 0; v < nverts; ++v)
    for (int k = 0; k < dim; ++k) {
      const long long ik = (v / stride[k]) % n1;
      points[static_cast<std::size_t>(v * dim + k)] = -1.0 + 2.0 * static_cast<double>(ik) / M;
    }

  std::vector<int> perm(dim);
  std::vector<std::vector<int>> perms;
  std::iota(perm.begin(), perm.end(), 0);
  do perms.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));

  long long ncubes = 1;
  for (int k = 0; k < dim; ++k) ncubes *= M;
  std::vector<int> cells;
  std::vector<double> kappa;
  cells.reserve(static_cast<std::size_t>(ncubes) * perms.size() * (dim + 1));
  kappa.reserve(static_cast<std::size_t>(ncubes) * perms.size());
  for (long long c = 0; c < ncubes; ++c) {
    long long corner = 0, rest = c;
    for (int k = 0; k < dim; ++k) {
      corner += (rest % M) * stride[k];
      rest /= M;
    }
    for (const auto& p : perms) {
      long long v = corner;
      Point centroid = Point::Zero(dim);
      for (int i = 0; i <= dim; ++i) {
        if (i > 0) v += stride[p[i - 1]];
        cells.push_back(static_cast<int>(v));
        for (int k = 0; k < dim; ++k) centroid[k] += points[static_cast<std::size_t>(v * dim + k)];
      }
      centroid /= dim + 1;
      kappa.push_back(kappa_fn(centroid));
    }
  }
  return Mesh(dim, std::move(points), std::move(cells), std::move(kappa), rule);
}

BoundaryRule dirichlet_on_x1_faces() {
  return [](const Point& c) {
    return std::abs(std::abs(c[0]) - 1.0) < 1e-12 ? BoundaryTag::Dirichlet : BoundaryTag::Neumann;
  };
}

std::vector<int> kappa_jump_vertices(const Mesh& mesh, double threshold) {
  std::vector<int> out;
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    double lo = INFINITY, hi = 0.0;
    for (int e : mesh.vertex_patch(static_cast<int>(v))) {
      lo = std::min(lo, mesh.kappa(e));
      hi = std::max(hi, mesh.kappa(e));
    }
    if (hi == 0.0) continue;
    if ((lo == 0.0 && hi > threshold) || (lo > 0.0 && hi / lo > threshold))
      out.push_back(static_cast<int>(v));
  }
  return out;
}

}  // namespace rdflux
