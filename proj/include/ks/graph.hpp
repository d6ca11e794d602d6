#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ks/catalog.hpp"
#include "ks/errors.hpp"
#include "ks/ray.hpp"

namespace ks {

// Orthogonality graph: vertex order matches the ray order of the record it
// was built from.  Rays are kept alongside so basis enumeration can verify
// projector sums and rigidity analysis can start from the realization.
struct OrthoGraph {
  int n_vertices = 0;
  int dim = 0;
  std::vector<std::vector<bool>> adj;        // n x n symmetric, no loops
  std::vector<std::pair<int, int>> edges;    // i < j, lexicographically sorted
  std::vector<Ray> rays;                     // size n_vertices (may be empty
                                             // for synthetic test graphs)

  bool adjacent(int i, int j) const { return adj[static_cast<size_t>(i)][static_cast<size_t>(j)]; }
};

// A complete basis: exactly dim pairwise-adjacent vertices whose projectors
// sum to the identity.
struct Basis {
  std::vector<int> vertices;  // sorted ascending
};

// Builds the graph of a record: edge {i,j} iff |<ray_i,ray_j>| <= ortho_tol.
OrthoGraph build_graph(const KSSetRecord& set, const Tolerance& tol = {});

// Builds a graph from explicit edges and no rays (test helper for synthetic
// graphs; basis enumeration requires rays and will not accept these).
OrthoGraph graph_from_edges(int n_vertices, int dim,
                            std::vector<std::pair<int, int>> edges);

// Returns all dim-cliques, sorted lexicographically by vertex list.  Every
// clique is verified against the projector-sum test sum_m P_m = I (Frobenius
// tolerance 1e-8); a failing clique raises CliqueNotBasisError because rays
// that are pairwise orthogonal but do not span indicate a transcription
// error, not a legitimate state.
std::vector<Basis> enumerate_bases(const OrthoGraph& graph);

// Exact edge-preserving vertex bijection g1 -> g2, or nullopt.  Iterated
// degree/neighbor-multiset refinement prunes the backtracking.
std::optional<std::vector<int>> graph_isomorphic(const OrthoGraph& g1,
                                                 const OrthoGraph& g2);

// Emits an undirected DOT graph with deterministic ordering.  If labels are
// given they must have length n_vertices (else LabelError).
std::string to_dot(const OrthoGraph& graph,
                   const std::optional<std::vector<std::string>>& labels =
                       std::nullopt);

}  // namespace ks
