#include "ks/color.hpp"

#include <algorithm>

namespace ks {
namespace {

// Backtracking state for one search instance.
class Solver {
 public:
  Solver(const OrthoGraph& graph, const std::vector<Basis>& bases)
      : graph_(graph), bases_(bases) {
    const size_t n = static_cast<size_t>(graph.n_vertices);
    value_.assign(n, -1);
    vertex_bases_.assign(n, {});
    for (size_t bi = 0; bi < bases.size(); ++bi) {
      const auto& b = bases[bi].vertices;
      for (size_t p = 0; p < b.size(); ++p) {
        for (size_t q = p + 1; q < b.size(); ++q) {
          if (!graph.adjacent(b[p], b[q])) {
            throw InputError("find_ks_coloring: basis " + std::to_string(bi) +
                             " is not a clique of the graph");
          }
        }
        if (b[p] < 0 || b[p] >= graph.n_vertices) {
          throw InputError("find_ks_coloring: basis vertex out of range");
        }
        vertex_bases_[static_cast<size_t>(b[p])].push_back(
            static_cast<int>(bi));
      }
    }
    ones_.assign(bases.size(), 0);
    zeros_.assign(bases.size(), 0);
  }

  std::pair<std::optional<Coloring>, SearchStats> run() {
    bool ok = true;
    // Degenerate single-vertex bases force their vertex immediately.
    for (size_t bi = 0; bi < bases_.size() && ok; ++bi) {
      if (bases_[bi].vertices.size() == 1) {
        ok = assign(bases_[bi].vertices[0], 1, /*decision=*/false);
      }
    }
    const bool found = ok && search();
    stats_.result = found ? ColorResult::COLOURABLE : ColorResult::UNCOLOURABLE;
    if (!found) return {std::nullopt, stats_};
    Coloring coloring;
    coloring.values.resize(value_.size());
    for (size_t v = 0; v < value_.size(); ++v) {
      coloring.values[v] = value_[v] == 1 ? 1 : 0;
    }
    return {coloring, stats_};
  }

 private:
  bool assign(int v, int val, bool decision) {
    const size_t vi = static_cast<size_t>(v);
    if (value_[vi] != -1) return value_[vi] == val;
    value_[vi] = val;
    trail_.push_back(v);
    if (decision) {
      ++stats_.nodes_explored;
    } else {
      ++stats_.propagations;
    }
    // Commit every counter update for this vertex before any early return:
    // undo_to decrements all of them, so a partial commit would corrupt the
    // counters (and with them conflict detection) after backtracking.
    if (val == 1) {
      bool conflict = false;
      for (int bi : vertex_bases_[vi]) {
        if (++ones_[static_cast<size_t>(bi)] > 1) conflict = true;
      }
      if (conflict) return false;
      for (int w = 0; w < graph_.n_vertices; ++w) {
        if (graph_.adjacent(v, w) && !assign(w, 0, false)) return false;
      }
    } else {
      bool conflict = false;
      for (int bi : vertex_bases_[vi]) {
        const size_t b = static_cast<size_t>(bi);
        if (++zeros_[b] == static_cast<int>(bases_[b].vertices.size())) {
          conflict = true;  // basis entirely 0
        }
      }
      if (conflict) return false;
      for (int bi : vertex_bases_[vi]) {
        const size_t b = static_cast<size_t>(bi);
        if (ones_[b] == 0 &&
            zeros_[b] ==
                static_cast<int>(bases_[b].vertices.size()) - 1) {
          // All but one vertex at 0: the last is forced to 1.
          for (int u : bases_[b].vertices) {
            if (value_[static_cast<size_t>(u)] == -1) {
              if (!assign(u, 1, false)) return false;
              break;
            }
          }
        }
      }
    }
    return true;
  }

  void undo_to(size_t mark) {
    while (trail_.size() > mark) {
      const int v = trail_.back();
      trail_.pop_back();
      const size_t vi = static_cast<size_t>(v);
      if (value_[vi] == 1) {
        for (int bi : vertex_bases_[vi]) --ones_[static_cast<size_t>(bi)];
      } else {
        for (int bi : vertex_bases_[vi]) --zeros_[static_cast<size_t>(bi)];
      }
      value_[vi] = -1;
    }
  }

  // Branch on the unassigned vertex appearing in the most unresolved bases.
  int pick_branch_vertex() const {
    int best = -1;
    int best_count = 0;
    for (int v = 0; v < graph_.n_vertices; ++v) {
      if (value_[static_cast<size_t>(v)] != -1) continue;
      int count = 0;
      for (int bi : vertex_bases_[static_cast<size_t>(v)]) {
        if (ones_[static_cast<size_t>(bi)] == 0) ++count;
      }
      if (count > best_count) {
        best_count = count;
        best = v;
      }
    }
    return best;  // -1 when every basis already has its 1
  }

  bool search() {
    const int v = pick_branch_vertex();
    if (v < 0) return true;  // all bases resolved; unassigned vertices take 0
    for (int val : {1, 0}) {
      const size_t mark = trail_.size();
      if (assign(v, val, /*decision=*/true) && search()) return true;
      undo_to(mark);
    }
    return false;
  }

  const OrthoGraph& graph_;
  const std::vector<Basis>& bases_;
  std::vector<int> value_;
  std::vector<std::vector<int>> vertex_bases_;
  std::vector<int> ones_;
  std::vector<int> zeros_;
  std::vector<int> trail_;
  SearchStats stats_;
};

}  // namespace

std::pair<std::optional<Coloring>, SearchStats> find_ks_coloring(
    const OrthoGraph& graph, const std::vector<Basis>& bases) {
  Solver solver(graph, bases);
  auto [coloring, stats] = solver.run();
  if (coloring && !coloring_valid(graph, bases, *coloring)) {
    // The search must never hand back an invalid colouring.
    throw Error("find_ks_coloring: internal verification failed");
  }
  return {coloring, stats};
}

bool coloring_valid(const OrthoGraph& graph, const std::vector<Basis>& bases,
                    const Coloring& coloring) {
  if (static_cast<int>(coloring.values.size()) != graph.n_vertices) {
    return false;
  }
  for (int v : coloring.values) {
    if (v != 0 && v != 1) return false;
  }
  for (const auto& [i, j] : graph.edges) {
    if (coloring.values[static_cast<size_t>(i)] +
            coloring.values[static_cast<size_t>(j)] >
        1) {
      return false;
    }
  }
  for (const auto& b : bases) {
    int sum = 0;
    for (int v : b.vertices) sum += coloring.values[static_cast<size_t>(v)];
    if (sum != 1) return false;
  }
  return true;
}

CriticalityReport check_critical(const OrthoGraph& graph,
                                 const std::vector<Basis>& bases) {
  {
    auto [coloring, stats] = find_ks_coloring(graph, bases);
    if (coloring) {
      throw InputError("check_critical: input is colourable as given");
    }
  }
  CriticalityReport report;
  report.critical = true;
  for (int v = 0; v < graph.n_vertices; ++v) {
    // Delete v: drop it, its incident edges, and every basis containing it.
    std::vector<int> remap(static_cast<size_t>(graph.n_vertices), -1);
    int next = 0;
    for (int u = 0; u < graph.n_vertices; ++u) {
      if (u != v) remap[static_cast<size_t>(u)] = next++;
    }
    std::vector<std::pair<int, int>> edges;
    for (const auto& [i, j] : graph.edges) {
      if (i != v && j != v) {
        edges.emplace_back(remap[static_cast<size_t>(i)],
                           remap[static_cast<size_t>(j)]);
      }
    }
    OrthoGraph sub = graph_from_edges(graph.n_vertices - 1, graph.dim, edges);
    std::vector<Basis> sub_bases;
    for (const auto& b : bases) {
      if (std::find(b.vertices.begin(), b.vertices.end(), v) ==
          b.vertices.end()) {
        Basis nb;
        for (int u : b.vertices) {
          nb.vertices.push_back(remap[static_cast<size_t>(u)]);
        }
        sub_bases.push_back(std::move(nb));
      }
    }
    auto [coloring, stats] = find_ks_coloring(sub, sub_bases);
    const ColorResult result =
        coloring ? ColorResult::COLOURABLE : ColorResult::UNCOLOURABLE;
    if (result == ColorResult::UNCOLOURABLE) report.critical = false;
    report.deletions.push_back(DeletionOutcome{v, result});
  }
  return report;
}

}  // namespace ks
