#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>

#include "ks/catalog.hpp"
#include "ks/errors.hpp"
#include "ks/graph.hpp"

using namespace ks;

namespace {

KSSetRecord basis_plus_diagonal() {
  return parse_set(
      "name: toy\ndim: 3\n1,0,0\n0,1,0\n0,0,1\n0,1,1\n", "toy");
}

std::filesystem::path catalog_dir() { return KS_CATALOG_DIR; }

}  // namespace

TEST_CASE("build_graph finds exactly the orthogonal pairs") {
  OrthoGraph g = build_graph(basis_plus_diagonal());
  CHECK(g.n_vertices == 4);
  CHECK(g.dim == 3);
  // (0,1),(0,2),(1,2) basis pairs and (0,3): the diagonal 0,1,1 is orthogonal
  // to the first axis only.
  std::vector<std::pair<int, int>> want = {{0, 1}, {0, 2}, {0, 3}, {1, 2}};
  CHECK(g.edges == want);
  CHECK(g.adjacent(0, 3));
  CHECK_FALSE(g.adjacent(1, 3));
  // Adjacency is symmetric with an empty diagonal.
  for (int i = 0; i < 4; ++i) {
    CHECK_FALSE(g.adjacent(i, i));
    for (int j = 0; j < 4; ++j) CHECK(g.adjacent(i, j) == g.adjacent(j, i));
  }
}

TEST_CASE("build_graph respects the orthogonality tolerance") {
  KSSetRecord rec =
      parse_set("name: t\ndim: 3\n1,0,0\n1e-5,1,0\n", "t");
  Tolerance strict;  // 1e-9
  CHECK(build_graph(rec, strict).edges.empty());
  Tolerance loose;
  loose.ortho_tol = 1e-3;
  CHECK(build_graph(rec, loose).edges.size() == 1);
}

TEST_CASE("enumerate_bases returns dim-cliques that resolve the identity") {
  OrthoGraph g = build_graph(basis_plus_diagonal());
  std::vector<Basis> bases = enumerate_bases(g);
  REQUIRE(bases.size() == 1);
  CHECK(bases[0].vertices == std::vector<int>{0, 1, 2});
}

TEST_CASE("enumerate_bases on a shipped catalog set matches its header") {
  KSSetRecord rec = load_set(catalog_dir() / "peres33.ks");
  OrthoGraph g = build_graph(rec);
  std::vector<Basis> bases = enumerate_bases(g);
  CHECK(static_cast<int>(bases.size()) == rec.expected.bases);
  CHECK(static_cast<int>(g.edges.size()) == rec.expected.orthogonalities);
  // Sorted lexicographically and each sorted internally.
  for (size_t k = 0; k + 1 < bases.size(); ++k) {
    CHECK(bases[k].vertices < bases[k + 1].vertices);
  }
  for (const Basis& b : bases) {
    CHECK(std::is_sorted(b.vertices.begin(), b.vertices.end()));
    CHECK(static_cast<int>(b.vertices.size()) == rec.dim);
  }
}

TEST_CASE("enumerate_bases requires rays") {
  OrthoGraph g = graph_from_edges(3, 3, {{0, 1}, {0, 2}, {1, 2}});
  CHECK_THROWS_AS(enumerate_bases(g), InputError);
}

TEST_CASE("graph_from_edges builds synthetic graphs") {
  OrthoGraph g = graph_from_edges(4, 3, {{2, 3}, {0, 1}});
  CHECK(g.n_vertices == 4);
  CHECK(g.edges == std::vector<std::pair<int, int>>{{0, 1}, {2, 3}});
  CHECK(g.adjacent(3, 2));
  CHECK_FALSE(g.adjacent(0, 2));
}

TEST_CASE("graph_isomorphic finds a relabeling and certifies it") {
  // A 5-cycle against its relabeled copy.
  OrthoGraph a = graph_from_edges(5, 3, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}});
  OrthoGraph b = graph_from_edges(5, 3, {{0, 2}, {2, 4}, {1, 4}, {1, 3}, {0, 3}});
  auto iso = graph_isomorphic(a, b);
  REQUIRE(iso.has_value());
  const std::vector<int>& m = *iso;
  std::set<int> image(m.begin(), m.end());
  CHECK(image.size() == 5);  // bijection
  for (const auto& [i, j] : a.edges) {
    CHECK(b.adjacent(m[static_cast<size_t>(i)], m[static_cast<size_t>(j)]));
  }
}

TEST_CASE("graph_isomorphic rejects non-isomorphic graphs") {
  OrthoGraph cycle = graph_from_edges(5, 3, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}});
  OrthoGraph path = graph_from_edges(5, 3, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  CHECK_FALSE(graph_isomorphic(cycle, path).has_value());
  // Same degree sequence, different structure: two triangles vs 6-cycle.
  OrthoGraph twotri = graph_from_edges(6, 3, {{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {4, 5}});
  OrthoGraph hex = graph_from_edges(6, 3, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}});
  CHECK_FALSE(graph_isomorphic(twotri, hex).has_value());
}

TEST_CASE("to_dot is deterministic and honors labels") {
  OrthoGraph g = graph_from_edges(3, 3, {{0, 2}, {0, 1}});
  std::string plain = to_dot(g);
  CHECK(plain.find("graph") != std::string::npos);
  CHECK(plain.find("0 -- 1") != std::string::npos);
  CHECK(plain.find("0 -- 2") != std::string::npos);
  CHECK(plain == to_dot(g));  // deterministic

  std::vector<std::string> labels = {"a", "b", "c"};
  std::string labeled = to_dot(g, labels);
  CHECK(labeled.find("a") != std::string::npos);
  CHECK_THROWS_AS(to_dot(g, std::vector<std::string>{"a"}), LabelError);
}
