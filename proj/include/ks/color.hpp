#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ks/errors.hpp"
#include "ks/graph.hpp"

namespace ks {

// A 0/1 value assignment: at most one 1 per edge, exactly one 1 per basis.
struct Coloring {
  std::vector<int> values;  // one per vertex, each 0 or 1
};

enum class ColorResult { COLOURABLE, UNCOLOURABLE };

struct SearchStats {
  std::int64_t nodes_explored = 0;
  std::int64_t propagations = 0;
  ColorResult result = ColorResult::UNCOLOURABLE;
};

// Complete backtracking search with unit propagation:
//   - assigning 1 forces 0 on all neighbors;
//   - a basis with all but one vertex at 0 forces the last to 1;
//   - a basis with all vertices 0, or with two 1s, triggers backtrack.
// Branches on the vertex in the most unresolved bases, value 1 first.
// Returns a coloring satisfying both invariants, or nullopt after exhaustive
// search.  Throws InputError if a basis is not a clique of the graph.
std::pair<std::optional<Coloring>, SearchStats> find_ks_coloring(
    const OrthoGraph& graph, const std::vector<Basis>& bases);

// Verifies both coloring invariants directly (independent of the search).
bool coloring_valid(const OrthoGraph& graph, const std::vector<Basis>& bases,
                    const Coloring& coloring);

// Per-vertex deletion outcome for criticality analysis.
struct DeletionOutcome {
  int vertex = 0;
  ColorResult result = ColorResult::UNCOLOURABLE;
};

struct CriticalityReport {
  std::vector<DeletionOutcome> deletions;  // one per vertex, ascending
  bool critical = false;  // every deletion yields COLOURABLE
};

// Deleting vertex v removes v, its incident edges, and every basis
// containing v from the exactly-one constraints; remaining edges keep the
// at-most-one rule.  The set is critical iff every single-vertex deletion is
// colourable.  Throws InputError if the input is colourable to begin with.
CriticalityReport check_critical(const OrthoGraph& graph,
                                 const std::vector<Basis>& bases);

}  // namespace ks
