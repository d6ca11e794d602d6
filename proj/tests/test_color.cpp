#include <doctest.h>

#include <cstdint>
#include <random>
#include <vector>

#include "ks/catalog.hpp"
#include "ks/color.hpp"
#include "ks/errors.hpp"
#include "ks/graph.hpp"

using namespace ks;

namespace {

std::filesystem::path catalog_dir() { return KS_CATALOG_DIR; }

// Exhaustive 2^n reference: is there a 0/1 assignment with at most one 1 per
// edge and exactly one 1 per basis?
bool brute_force_colourable(const OrthoGraph& g,
                            const std::vector<Basis>& bases) {
  REQUIRE(g.n_vertices <= 24);
  for (std::uint32_t mask = 0; mask < (1u << g.n_vertices); ++mask) {
    bool ok = true;
    for (const auto& [i, j] : g.edges) {
      if ((mask >> i & 1u) && (mask >> j & 1u)) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    for (const Basis& b : bases) {
      int ones = 0;
      for (int v : b.vertices) ones += static_cast<int>(mask >> v & 1u);
      if (ones != 1) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("a single basis is colourable and the coloring is valid") {
  KSSetRecord rec = parse_set("name: t\ndim: 3\n1,0,0\n0,1,0\n0,0,1\n", "t");
  OrthoGraph g = build_graph(rec);
  std::vector<Basis> bases = enumerate_bases(g);
  auto [coloring, stats] = find_ks_coloring(g, bases);
  REQUIRE(coloring.has_value());
  CHECK(stats.result == ColorResult::COLOURABLE);
  CHECK(coloring_valid(g, bases, *coloring));
  int ones = 0;
  for (int v : coloring->values) ones += v;
  CHECK(ones == 1);
}

TEST_CASE("coloring_valid rejects both invariant violations") {
  KSSetRecord rec = parse_set("name: t\ndim: 3\n1,0,0\n0,1,0\n0,0,1\n", "t");
  OrthoGraph g = build_graph(rec);
  std::vector<Basis> bases = enumerate_bases(g);
  Coloring two_ones{{1, 1, 0}};  // adjacent pair both 1
  CHECK_FALSE(coloring_valid(g, bases, two_ones));
  Coloring no_ones{{0, 0, 0}};  // basis without a 1
  CHECK_FALSE(coloring_valid(g, bases, no_ones));
  Coloring good{{0, 0, 1}};
  CHECK(coloring_valid(g, bases, good));
}

TEST_CASE("find_ks_coloring rejects a basis that is not a clique") {
  OrthoGraph g = graph_from_edges(3, 3, {{0, 1}});
  std::vector<Basis> bases = {Basis{{0, 1, 2}}};
  CHECK_THROWS_AS(find_ks_coloring(g, bases), InputError);
}

TEST_CASE("shipped catalog sets admit no KS coloring") {
  for (const char* name : {"peres33", "penrose33", "schuette33", "pavicic20"}) {
    KSSetRecord rec = load_set(catalog_dir() / (std::string(name) + ".ks"));
    OrthoGraph g = build_graph(rec);
    std::vector<Basis> bases = enumerate_bases(g);
    auto [coloring, stats] = find_ks_coloring(g, bases);
    INFO(name);
    CHECK_FALSE(coloring.has_value());
    CHECK(stats.result == ColorResult::UNCOLOURABLE);
    CHECK(stats.nodes_explored > 0);
  }
}

TEST_CASE("search agrees with the exhaustive oracle on random subinstances") {
  // Random vertex subsets of a shipped set, restricted edges and surviving
  // bases: small enough for the 2^n oracle, structured enough to exercise
  // propagation. Both colourable and uncolourable cases occur.
  KSSetRecord rec = load_set(catalog_dir() / "peres33.ks");
  OrthoGraph full = build_graph(rec);
  std::vector<Basis> all_bases = enumerate_bases(full);
  std::mt19937_64 rng(12345);
  int colourable_seen = 0, uncolourable_seen = 0;
  for (int trial = 0; trial < 24; ++trial) {
    int m = 12 + static_cast<int>(rng() % 7);  // 12..18 vertices
    std::vector<int> verts(static_cast<size_t>(full.n_vertices));
    for (size_t k = 0; k < verts.size(); ++k) verts[k] = static_cast<int>(k);
    std::shuffle(verts.begin(), verts.end(), rng);
    verts.resize(static_cast<size_t>(m));
    std::sort(verts.begin(), verts.end());
    std::vector<int> where(static_cast<size_t>(full.n_vertices), -1);
    for (int k = 0; k < m; ++k) where[static_cast<size_t>(verts[static_cast<size_t>(k)])] = k;

    std::vector<std::pair<int, int>> edges;
    for (const auto& [i, j] : full.edges) {
      if (where[static_cast<size_t>(i)] >= 0 && where[static_cast<size_t>(j)] >= 0) {
        edges.emplace_back(where[static_cast<size_t>(i)], where[static_cast<size_t>(j)]);
      }
    }
    OrthoGraph sub = graph_from_edges(m, rec.dim, edges);
    std::vector<Basis> bases;
    for (const Basis& b : all_bases) {
      Basis nb;
      bool keep = true;
      for (int v : b.vertices) {
        if (where[static_cast<size_t>(v)] < 0) {
          keep = false;
          break;
        }
        nb.vertices.push_back(where[static_cast<size_t>(v)]);
      }
      if (keep) bases.push_back(nb);
    }

    auto [coloring, stats] = find_ks_coloring(sub, bases);
    bool oracle = brute_force_colourable(sub, bases);
    INFO("trial ", trial, " vertices ", m, " bases ", bases.size());
    CHECK(coloring.has_value() == oracle);
    if (coloring.has_value()) {
      CHECK(coloring_valid(sub, bases, *coloring));
      ++colourable_seen;
    } else {
      ++uncolourable_seen;
    }
  }
  CHECK(colourable_seen > 0);
}

TEST_CASE("criticality holds for sets that claim it") {
  for (const char* name : {"peres33", "schuette33", "pavicic20"}) {
    KSSetRecord rec = load_set(catalog_dir() / (std::string(name) + ".ks"));
    REQUIRE(rec.expected.critical);
    OrthoGraph g = build_graph(rec);
    std::vector<Basis> bases = enumerate_bases(g);
    CriticalityReport crit = check_critical(g, bases);
    INFO(name);
    CHECK(crit.critical);
    CHECK(static_cast<int>(crit.deletions.size()) == g.n_vertices);
    for (const DeletionOutcome& d : crit.deletions) {
      CHECK(d.result == ColorResult::COLOURABLE);
    }
  }
}

TEST_CASE("check_critical rejects colourable input") {
  KSSetRecord rec = parse_set("name: t\ndim: 3\n1,0,0\n0,1,0\n0,0,1\n", "t");
  OrthoGraph g = build_graph(rec);
  std::vector<Basis> bases = enumerate_bases(g);
  CHECK_THROWS_AS(check_critical(g, bases), InputError);
}
