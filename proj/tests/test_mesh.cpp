// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"
#include "rdflux/mesh.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

using namespace rdflux;

namespace {

const ScalarField one = [](const Point&) { return 1.0; };

Mesh two_triangles(const std::string& tag_a = "D", const std::string& tag_b = "N") {
  std::istringstream in("DIM 2\nPOINTS 4\n0 0\n1 0\n1 1\n0 1\nCELLS 2\n0 1 2 1.5\n0 2 3 2.5\nBOUNDARY 4\n0 1 " + tag_a +
                        "\n1 2 " + tag_b + "\n2 3 N\n3 0 N\n");
  return read_mesh(in);
}

}  // namespace

TEST_CASE("cube mesh counts") {
  for (int dim = 2; dim <= 4; ++dim)
    for (int M : {1, 2, 3}) {
      const Mesh mesh = build_cube_mesh(M, dim, one, dirichlet_on_x1_faces());
      long long nv = 1, ne = 1;
      for (int k = 0; k < dim; ++k) nv *= M + 1, ne *= M;
      for (int k = 2; k <= dim; ++k) ne *= k;
      CHECK(static_cast<long long>(mesh.num_vertices()) == nv);
      CHECK(static_cast<long long>(mesh.num_elements()) == ne);
      long long dofs = M - 1;
      for (int k = 1; k < dim; ++k) dofs *= M + 1;
      CHECK(static_cast<long long>(mesh.num_free_vertices()) == dofs);
      // Every element has dim+1 facets; interior ones are counted twice.
      std::size_t boundary = 0;
      for (const Facet& f : mesh.facets()) boundary += f.interior() ? 0 : 1;
      CHECK(2 * mesh.num_facets() - boundary == mesh.num_elements() * (dim + 1));
      double volume = 0.0;
      for (std::size_t e = 0; e < mesh.num_elements(); ++e) volume += mesh.element_geometry(static_cast<int>(e)).volume;
      CHECK(volume == doctest::Approx(std::pow(2.0, dim)).epsilon(1e-12));
    }
}

TEST_CASE("benchmark mesh size") {
  const Mesh mesh = build_cube_mesh(16, 3, one, dirichlet_on_x1_faces());
  CHECK(mesh.num_free_vertices() == 4335);
  CHECK(mesh.num_elements() == 6 * 16 * 16 * 16);
}

TEST_CASE("boundary facets lie on the cube surface and tags follow the rule") {
  const Mesh mesh = build_cube_mesh(3, 3, one, dirichlet_on_x1_faces());
  for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
    const Facet& facet = mesh.facet(static_cast<int>(f));
    const Point c = mesh.facet_centroid(static_cast<int>(f));
    const double dist = 1.0 - c.cwiseAbs().maxCoeff();
    if (facet.interior()) {
      CHECK(dist > 1e-12);
      CHECK_FALSE(facet.boundary.has_value());
    } else {
      CHECK(dist < 1e-12);
      CHECK(facet.is_dirichlet() == (std::abs(std::abs(c[0]) - 1.0) < 1e-12));
    }
  }
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
    CHECK(mesh.is_dirichlet_vertex(static_cast<int>(v)) ==
          (std::abs(std::abs(mesh.point(static_cast<int>(v))[0]) - 1.0) < 1e-12));
}

TEST_CASE("adjacency is consistent") {
  std::mt19937 rng(1);
  const Mesh mesh = rdflux::testing::random_small_mesh(rng, 3, 2, {0.5, 3.0});
  for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
    const Facet& facet = mesh.facet(static_cast<int>(f));
    CHECK(mesh.element_facets(facet.side_a.element)[facet.side_a.local] == static_cast<int>(f));
    CHECK(facet.sign(facet.side_a.element) == 1);
    if (facet.interior()) {
      CHECK(facet.side_a.element < facet.side_b->element);
      CHECK(facet.sign(facet.side_b->element) == -1);
      CHECK(mesh.element_facets(facet.side_b->element)[facet.side_b->local] == static_cast<int>(f));
    }
    // The facet vertices are the element vertices minus the opposite one.
    const auto ids = mesh.element(facet.side_a.element);
    std::set<int> expect(ids.begin(), ids.end());
    expect.erase(ids[facet.side_a.local]);
    const auto fv = mesh.facet_vertices(static_cast<int>(f));
    CHECK(std::set<int>(fv.begin(), fv.end()) == expect);
    CHECK(std::is_sorted(fv.begin(), fv.end()));
  }
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const auto patch = mesh.vertex_patch(static_cast<int>(v));
    CHECK(std::is_sorted(patch.begin(), patch.end()));
    for (int e : patch) {
      const auto ids = mesh.element(e);
      CHECK(std::find(ids.begin(), ids.end(), static_cast<int>(v)) != ids.end());
    }
  }
}

TEST_CASE("elements are stored in canonical vertex order") {
  const Mesh mesh = two_triangles();
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto ids = mesh.element(static_cast<int>(e));
    CHECK(std::is_sorted(ids.begin(), ids.end()));
  }
  CHECK(mesh.kappa(0) == 1.5);
  CHECK(mesh.kappa(1) == 2.5);
  CHECK(mesh.is_dirichlet_vertex(0));
  CHECK(mesh.is_dirichlet_vertex(1));
  CHECK_FALSE(mesh.is_dirichlet_vertex(2));
}

TEST_CASE("mesh file round trip") {
  std::mt19937 rng(9);
  const Mesh mesh = rdflux::testing::random_small_mesh(rng, 2, 3, {0.0, 1.0, 7.0});
  std::stringstream buf;
  write_mesh(buf, mesh);
  const Mesh back = read_mesh(buf);
  CHECK(back.raw_points() == mesh.raw_points());
  CHECK(back.raw_cells() == mesh.raw_cells());
  CHECK(back.kappa() == mesh.kappa());
  REQUIRE(back.num_facets() == mesh.num_facets());
  for (std::size_t f = 0; f < mesh.num_facets(); ++f)
    CHECK(back.facet(static_cast<int>(f)).boundary == mesh.facet(static_cast<int>(f)).boundary);
}

TEST_CASE("mesh file comments and errors") {
  std::istringstream ok("# header\nDIM 2 # dimension\nPOINTS 3\n0 0\n1 0\n0 1\nCELLS 1\n0 1 2 4\n"
                        "BOUNDARY 3\n0 1 D\n1 2 N # slanted\n0 2 N\n");
  CHECK(read_mesh(ok).num_elements() == 1);

  std::istringstream bad_tag("DIM 2\nPOINTS 3\n0 0\n1 0\n0 1\nCELLS 1\n0 1 2 4\nBOUNDARY 3\n0 1 X\n1 2 N\n0 2 N\n");
  CHECK_THROWS_AS(read_mesh(bad_tag), MeshFormatError);

  std::istringstream missing("DIM 2\nPOINTS 3\n0 0\n1 0\n0 1\nCELLS 1\n0 1 2 4\nBOUNDARY 2\n0 1 D\n1 2 N\n");
  CHECK_THROWS_AS(read_mesh(missing), MeshFormatError);

  std::istringstream truncated("DIM 2\nPOINTS 3\n0 0\n1 0\n");
  CHECK_THROWS_AS(read_mesh(truncated), MeshFormatError);

  std::istringstream number("DIM 2\nPOINTS 3\n0 0\n1 zero\n0 1\n");
  try {
    read_mesh(number);
    FAIL("expected MeshFormatError");
  } catch (const MeshFormatError& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }

  std::istringstream interior("DIM 2\nPOINTS 4\n0 0\n1 0\n1 1\n0 1\nCELLS 2\n0 1 2 1\n0 2 3 1\n"
                              "BOUNDARY 5\n0 1 D\n1 2 N\n2 3 N\n3 0 N\n0 2 N\n");
  CHECK_THROWS_AS(read_mesh(interior), MeshFormatError);

  std::istringstream negative("DIM 2\nPOINTS 3\n0 0\n1 0\n0 1\nCELLS 1\n0 1 2 -1\nBOUNDARY 3\n0 1 D\n1 2 N\n0 2 N\n");
  CHECK_THROWS_AS(read_mesh(negative), MeshFormatError);

  std::istringstream flat("DIM 2\nPOINTS 3\n0 0\n1 0\n2 0\nCELLS 1\n0 1 2 1\nBOUNDARY 3\n0 1 D\n1 2 N\n0 2 N\n");
  CHECK_THROWS_AS(read_mesh(flat), DegenerateSimplex);
}

TEST_CASE("non-conforming meshes are rejected") {
  SUBCASE("T-junction") {
    // Lower triangle with edge (0,0)-(2,0); two upper triangles meet at the
    // midpoint (1,0) of that edge.
    std::vector<double> pts = {0, 0, 2, 0, 1, -1, 1, 0, 1, 1};
    std::vector<int> cells = {0, 1, 2, 0, 3, 4, 3, 1, 4};
    CHECK_THROWS_AS(Mesh(2, pts, cells, {1, 1, 1}, [](const Point&) { return BoundaryTag::Dirichlet; }),
                    NonConformingMesh);
  }
  SUBCASE("facet shared by three elements") {
    std::vector<double> pts = {0, 0, 1, 0, 0, 1, 0, -1, 1, 1};
    std::vector<int> cells = {0, 1, 2, 0, 1, 3, 0, 1, 4};
    CHECK_THROWS_AS(Mesh(2, pts, cells, {1, 1, 1}, [](const Point&) { return BoundaryTag::Dirichlet; }),
                    NonConformingMesh);
  }
}

TEST_CASE("kappa jump vertices") {
  const Mesh mesh = two_triangles();
  CHECK(kappa_jump_vertices(mesh).empty());
  // Only the shared vertices 0 and 2 see both kappa values.
  CHECK(kappa_jump_vertices(mesh, 1.5) == std::vector<int>{0, 2});
  std::istringstream in("DIM 2\nPOINTS 4\n0 0\n1 0\n1 1\n0 1\nCELLS 2\n0 1 2 0\n0 2 3 500\n"
                        "BOUNDARY 4\n0 1 D\n1 2 N\n2 3 N\n3 0 N\n");
  CHECK(kappa_jump_vertices(read_mesh(in)) == std::vector<int>{0, 2});
}
