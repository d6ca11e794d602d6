#include "ks/graph.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <sstream>

namespace ks {

OrthoGraph build_graph(const KSSetRecord& set, const Tolerance& tol) {
  OrthoGraph g;
  g.n_vertices = static_cast<int>(set.rays.size());
  g.dim = set.dim;
  g.rays = set.rays;
  g.adj.assign(static_cast<size_t>(g.n_vertices),
               std::vector<bool>(static_cast<size_t>(g.n_vertices), false));
  for (int i = 0; i < g.n_vertices; ++i) {
    for (int j = i + 1; j < g.n_vertices; ++j) {
      if (is_orthogonal(set.rays[static_cast<size_t>(i)],
                        set.rays[static_cast<size_t>(j)], tol)) {
        g.adj[static_cast<size_t>(i)][static_cast<size_t>(j)] = true;
        g.adj[static_cast<size_t>(j)][static_cast<size_t>(i)] = true;
        g.edges.emplace_back(i, j);
      }
    }
  }
  return g;
}

OrthoGraph graph_from_edges(int n_vertices, int dim,
                            std::vector<std::pair<int, int>> edges) {
  OrthoGraph g;
  g.n_vertices = n_vertices;
  g.dim = dim;
  g.adj.assign(static_cast<size_t>(n_vertices),
               std::vector<bool>(static_cast<size_t>(n_vertices), false));
  for (auto& [i, j] : edges) {
    if (i == j || i < 0 || j < 0 || i >= n_vertices || j >= n_vertices) {
      throw InputError("graph_from_edges: bad edge");
    }
    if (i > j) std::swap(i, j);
    g.adj[static_cast<size_t>(i)][static_cast<size_t>(j)] = true;
    g.adj[static_cast<size_t>(j)][static_cast<size_t>(i)] = true;
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  g.edges = std::move(edges);
  return g;
}

namespace {

void extend_cliques(const OrthoGraph& g, std::vector<int>& clique,
                    const std::vector<int>& candidates,
                    std::vector<std::vector<int>>& out) {
  if (static_cast<int>(clique.size()) == g.dim) {
    out.push_back(clique);
    return;
  }
  for (size_t ci = 0; ci < candidates.size(); ++ci) {
    const int v = candidates[ci];
    std::vector<int> next;
    for (size_t cj = ci + 1; cj < candidates.size(); ++cj) {
      if (g.adjacent(v, candidates[cj])) next.push_back(candidates[cj]);
    }
    if (static_cast<int>(clique.size()) + 1 +
            static_cast<int>(next.size()) <
        g.dim) {
      continue;
    }
    clique.push_back(v);
    extend_cliques(g, clique, next, out);
    clique.pop_back();
  }
}

}  // namespace

std::vector<Basis> enumerate_bases(const OrthoGraph& graph) {
  if (graph.dim != 3 && graph.dim != 4) {
    throw InputError("enumerate_bases: dimension must be 3 or 4");
  }
  std::vector<std::vector<int>> cliques;
  std::vector<int> clique;
  std::vector<int> all(static_cast<size_t>(graph.n_vertices));
  for (int v = 0; v < graph.n_vertices; ++v) all[static_cast<size_t>(v)] = v;
  extend_cliques(graph, clique, all, cliques);

  std::vector<Basis> bases;
  bases.reserve(cliques.size());
  for (const auto& c : cliques) {
    if (graph.rays.empty()) {
      throw InputError(
          "enumerate_bases: graph carries no rays to verify the "
          "projector-sum test");
    }
    // sum_m P_m = I for the rank-1 projectors of the clique's rays.
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(graph.dim, graph.dim);
    for (int v : c) {
      const Eigen::VectorXcd& u = graph.rays[static_cast<size_t>(v)].v;
      p += u * u.adjoint();
    }
    p -= Eigen::MatrixXcd::Identity(graph.dim, graph.dim);
    if (p.norm() > 1e-8) {
      std::ostringstream msg;
      msg << "enumerate_bases: clique {";
      for (size_t k = 0; k < c.size(); ++k) {
        msg << (k ? "," : "") << c[k];
      }
      msg << "} fails the projector-sum test (|sum P - I| = " << p.norm()
          << ")";
      throw CliqueNotBasisError(msg.str());
    }
    bases.push_back(Basis{c});
  }
  return bases;  // generation order is lexicographic already
}

namespace {

// Iterated degree/neighbor-multiset refinement; returns stable color classes.
std::vector<int> refine_colors(const OrthoGraph& g) {
  const int n = g.n_vertices;
  std::vector<int> color(static_cast<size_t>(n), 0);
  for (int v = 0; v < n; ++v) {
    int deg = 0;
    for (int w = 0; w < n; ++w) deg += g.adjacent(v, w) ? 1 : 0;
    color[static_cast<size_t>(v)] = deg;
  }
  for (int round = 0; round < n; ++round) {
    std::map<std::pair<int, std::vector<int>>, int> relabel;
    std::vector<std::pair<int, std::vector<int>>> sig(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) {
      std::vector<int> nbr;
      for (int w = 0; w < n; ++w) {
        if (g.adjacent(v, w)) nbr.push_back(color[static_cast<size_t>(w)]);
      }
      std::sort(nbr.begin(), nbr.end());
      sig[static_cast<size_t>(v)] = {color[static_cast<size_t>(v)],
                                     std::move(nbr)};
    }
    for (int v = 0; v < n; ++v) {
      relabel.emplace(sig[static_cast<size_t>(v)],
                      static_cast<int>(relabel.size()));
    }
    std::vector<int> next(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) {
      next[static_cast<size_t>(v)] = relabel.at(sig[static_cast<size_t>(v)]);
    }
    if (next == color) break;
    color = std::move(next);
  }
  return color;
}

bool iso_backtrack(const OrthoGraph& g1, const OrthoGraph& g2,
                   const std::vector<int>& c1, const std::vector<int>& c2,
                   const std::vector<int>& order, size_t pos,
                   std::vector<int>& map12, std::vector<bool>& used) {
  if (pos == order.size()) return true;
  const int v = order[pos];
  for (int w = 0; w < g2.n_vertices; ++w) {
    if (used[static_cast<size_t>(w)]) continue;
    if (c2[static_cast<size_t>(w)] != c1[static_cast<size_t>(v)]) continue;
    bool ok = true;
    for (size_t p = 0; p < pos; ++p) {
      const int u = order[p];
      if (g1.adjacent(v, u) !=
          g2.adjacent(w, map12[static_cast<size_t>(u)])) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    map12[static_cast<size_t>(v)] = w;
    used[static_cast<size_t>(w)] = true;
    if (iso_backtrack(g1, g2, c1, c2, order, pos + 1, map12, used)) return true;
    used[static_cast<size_t>(w)] = false;
  }
  return false;
}

}  // namespace

std::optional<std::vector<int>> graph_isomorphic(const OrthoGraph& g1,
                                                 const OrthoGraph& g2) {
  if (g1.n_vertices != g2.n_vertices || g1.edges.size() != g2.edges.size()) {
    return std::nullopt;
  }
  const int n = g1.n_vertices;
  if (n == 0) return std::vector<int>{};
  // Refine both graphs' colors jointly so class labels are comparable.
  OrthoGraph joint;
  joint.n_vertices = 2 * n;
  joint.dim = g1.dim;
  joint.adj.assign(static_cast<size_t>(2 * n),
                   std::vector<bool>(static_cast<size_t>(2 * n), false));
  for (const auto& [i, j] : g1.edges) {
    joint.adj[static_cast<size_t>(i)][static_cast<size_t>(j)] = true;
    joint.adj[static_cast<size_t>(j)][static_cast<size_t>(i)] = true;
  }
  for (const auto& [i, j] : g2.edges) {
    joint.adj[static_cast<size_t>(n + i)][static_cast<size_t>(n + j)] = true;
    joint.adj[static_cast<size_t>(n + j)][static_cast<size_t>(n + i)] = true;
  }
  const std::vector<int> joint_color = refine_colors(joint);
  std::vector<int> c1(joint_color.begin(), joint_color.begin() + n);
  std::vector<int> c2(joint_color.begin() + n, joint_color.end());

  // Class histograms must agree.
  {
    std::vector<int> h1 = c1, h2 = c2;
    std::sort(h1.begin(), h1.end());
    std::sort(h2.begin(), h2.end());
    if (h1 != h2) return std::nullopt;
  }

  // Map rarest color classes first.
  std::vector<int> class_size(static_cast<size_t>(2 * n), 0);
  for (int v = 0; v < n; ++v) ++class_size[static_cast<size_t>(c1[static_cast<size_t>(v)])];
  std::vector<int> order(static_cast<size_t>(n));
  for (int v = 0; v < n; ++v) order[static_cast<size_t>(v)] = v;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const int sa = class_size[static_cast<size_t>(c1[static_cast<size_t>(a)])];
    const int sb = class_size[static_cast<size_t>(c1[static_cast<size_t>(b)])];
    if (sa != sb) return sa < sb;
    return a < b;
  });

  std::vector<int> map12(static_cast<size_t>(n), -1);
  std::vector<bool> used(static_cast<size_t>(n), false);
  if (iso_backtrack(g1, g2, c1, c2, order, 0, map12, used)) {
    return map12;
  }
  return std::nullopt;
}

std::string to_dot(const OrthoGraph& graph,
                   const std::optional<std::vector<std::string>>& labels) {
  if (labels && static_cast<int>(labels->size()) != graph.n_vertices) {
    throw LabelError("to_dot: " + std::to_string(labels->size()) +
                     " labels for " + std::to_string(graph.n_vertices) +
                     " vertices");
  }
  std::ostringstream out;
  out << "graph orthogonality {\n";
  for (int v = 0; v < graph.n_vertices; ++v) {
    out << "  " << v;
    if (labels) {
      std::string esc;
      for (char c : (*labels)[static_cast<size_t>(v)]) {
        if (c == '"' || c == '\\') esc.push_back('\\');
        esc.push_back(c);
      }
      out << " [label=\"" << esc << "\"]";
    }
    out << ";\n";
  }
  for (const auto& [i, j] : graph.edges) {
    out << "  " << i << " -- " << j << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace ks
