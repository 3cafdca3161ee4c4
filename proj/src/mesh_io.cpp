// SPDX-License-Identifier: Apache-2.0
#include "rdflux/mesh.hpp"

#include <fmt/format.h>

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace rdflux {
namespace {

// Whitespace tokenizer that drops '#' comments.
class TokenStream {
 public:
  explicit TokenStream(std::istream& in) : in_(in) {}

  std::string next(const char* what) {
    std::string tok;
    while (!(line_ >> tok)) {
      std::string raw;
      if (!std::getline(in_, raw)) throw MeshFormatError(std::string("unexpected end of mesh file, expected ") + what);
      ++lineno_;
      if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
      line_.clear();
      line_.str(raw);
    }
    return tok;
  }

  void expect(const char* keyword) {
    const std::string tok = next(keyword);
    if (tok != keyword) fail(fmt::format("expected '{}', found '{}'", keyword, tok));
  }

  long long integer(const char* what) {
    const std::string tok = next(what);
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(tok, &pos);
      if (pos == tok.size()) return v;
    } catch (const std::exception&) {
    }
    fail(fmt::format("expected integer {}, found '{}'", what, tok));
  }

  double real(const char* what) {
    const std::string tok = next(what);
    try {
      std::size_t pos = 0;
      const double v = std::stod(tok, &pos);
      if (pos == tok.size()) return v;
    } catch (const std::exception&) {
    }
    fail(fmt::format("expected number {}, found '{}'", what, tok));
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw MeshFormatError(fmt::format("mesh line {}: {}", lineno_, msg));
  }

 private:
  std::istream& in_;
  std::istringstream line_;
  int lineno_ = 0;
};

}  // namespace

Mesh read_mesh(std::istream& in) {
  TokenStream ts(in);
  ts.expect("DIM");
  const long long dim = ts.integer("dimension");
  if (dim < 2 || dim > kMaxDim) ts.fail("unsupported dimension");
  ts.expect("POINTS");
  const long long npts = ts.integer("point count");
  if (npts < 0) ts.fail("negative point count");
  std::vector<double> points;
  points.reserve(static_cast<std::size_t>(npts * dim));
  for (long long i = 0; i < npts * dim; ++i) points.push_back(ts.real("coordinate"));

  ts.expect("CELLS");
  const long long ncells = ts.integer("cell count");
  if (ncells < 0) ts.fail("negative cell count");
  std::vector<int> cells;
  std::vector<double> kappa;
  for (long long c = 0; c < ncells; ++c) {
    for (long long i = 0; i <= dim; ++i) {
      const long long v = ts.integer("vertex id");
      if (v < 0 || v >= npts) ts.fail("vertex id out of range");
      cells.push_back(static_cast<int>(v));
    }
    kappa.push_back(ts.real("kappa"));
  }

  ts.expect("BOUNDARY");
  const long long nb = ts.integer("boundary facet count");
  std::vector<BoundaryFacetSpec> tags(static_cast<std::size_t>(std::max(nb, 0LL)));
  for (auto& spec : tags) {
    for (long long i = 0; i < dim; ++i) {
      const long long v = ts.integer("vertex id");
      if (v < 0 || v >= npts) ts.fail("vertex id out of range");
      spec.vertex_ids.push_back(static_cast<int>(v));
    }
    const std::string tag = ts.next("boundary tag");
    if (tag == "D")
      spec.tag = BoundaryTag::Dirichlet;
    else if (tag == "N")
      spec.tag = BoundaryTag::Neumann;
    else
      ts.fail(fmt::format("boundary tag must be D or N, found '{}'", tag));
  }
  return Mesh(static_cast<int>(dim), std::move(points), std::move(cells), std::move(kappa), tags);
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  const int dim = mesh.dim();
  out << "DIM " << dim << "\nPOINTS " << mesh.num_vertices() << "\n";
  const auto& pts = mesh.raw_points();
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    for (int k = 0; k < dim; ++k) out << (k ? " " : "") << fmt::format("{:.17g}", pts[v * dim + k]);
    out << "\n";
  }
  out << "CELLS " << mesh.num_elements() << "\n";
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    for (int v : mesh.element(static_cast<int>(e))) out << v << " ";
    out << fmt::format("{:.17g}", mesh.kappa(static_cast<int>(e))) << "\n";
  }
  std::size_t nb = 0;
  for (const Facet& f : mesh.facets()) nb += f.interior() ? 0 : 1;
  out << "BOUNDARY " << nb << "\n";
  for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
    const Facet& facet = mesh.facet(static_cast<int>(f));
    if (facet.interior()) continue;
    for (int v : mesh.facet_vertices(static_cast<int>(f))) out << v << " ";
    out << (facet.is_dirichlet() ? "D" : "N") << "\n";
  }
}

}  // namespace rdflux
