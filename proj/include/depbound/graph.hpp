#pragma once

// Dependency-graph representation plus the coloring machinery the tail
// bounds consume. Vertices are dense ids 0..n-1, adjacency lists are kept
// sorted, and every algorithm iterates in a fixed order so downstream
// experiments are reproducible.

#include <algorithm>
#include <cstddef>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "depbound/bounds.hpp"

namespace depbound {

/// Simple undirected graph over vertices 0..n-1. Adjacent vertices mark
/// variable pairs that may be arbitrarily dependent.
class DependencyGraph {
 public:
  explicit DependencyGraph(std::size_t n = 0) : adjacency_(n) {}

  std::size_t vertex_count() const { return adjacency_.size(); }

  std::size_t edge_count() const {
    std::size_t deg_sum = 0;
    for (const auto& nbrs : adjacency_) deg_sum += nbrs.size();
    return deg_sum / 2;
  }

  void add_edge(std::size_t u, std::size_t v) {
    check_vertex(u);
    check_vertex(v);
    if (u == v) throw std::invalid_argument("self-loops are not allowed");
    if (has_edge(u, v)) throw std::invalid_argument("duplicate edge");
    insert_sorted(adjacency_[u], v);
    insert_sorted(adjacency_[v], u);
  }

  bool has_edge(std::size_t u, std::size_t v) const {
    check_vertex(u);
    check_vertex(v);
    const auto& nbrs = adjacency_[u];
    return std::binary_search(nbrs.begin(), nbrs.end(), v);
  }

  const std::vector<std::size_t>& neighbors(std::size_t v) const {
    check_vertex(v);
    return adjacency_[v];
  }

  std::size_t degree(std::size_t v) const { return neighbors(v).size(); }

  std::size_t max_degree() const {
    std::size_t d = 0;
    for (const auto& nbrs : adjacency_) d = std::max(d, nbrs.size());
    return d;
  }

 private:
  void check_vertex(std::size_t v) const {
    if (v >= adjacency_.size()) throw std::out_of_range("vertex id out of range");
  }

  static void insert_sorted(std::vector<std::size_t>& nbrs, std::size_t v) {
    nbrs.insert(std::upper_bound(nbrs.begin(), nbrs.end(), v), v);
  }

  std::vector<std::vector<std::size_t>> adjacency_;
};

/// Proper coloring: assignment maps each vertex to a color in 0..k-1 and
/// every color id is used at least once.
struct Coloring {
  std::vector<std::size_t> assignment;
  std::size_t k = 0;

  ColorClassSizes class_sizes() const {
    ColorClassSizes cs;
    cs.sizes.assign(k, 0);
    for (std::size_t c : assignment) cs.sizes[c]++;
    return cs;
  }
};

inline bool is_independent_set(const DependencyGraph& g, std::span<const std::size_t> s) {
  for (std::size_t v : s)
    if (v >= g.vertex_count()) throw std::out_of_range("vertex id out of range");
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j)
      if (g.has_edge(s[i], s[j])) return false;
  return true;
}

inline bool is_proper_coloring(const DependencyGraph& g, const Coloring& c) {
  if (c.assignment.size() != g.vertex_count()) return false;
  std::vector<bool> used(c.k, false);
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    if (c.assignment[v] >= c.k) return false;
    used[c.assignment[v]] = true;
    for (std::size_t u : g.neighbors(v))
      if (c.assignment[u] == c.assignment[v]) return false;
  }
  return std::all_of(used.begin(), used.end(), [](bool b) { return b; });
}

enum class ColorOrder { natural, degree_descending };

/// First-fit greedy coloring; uses at most max_degree + 1 colors in any
/// vertex order.
inline Coloring greedy_coloring(const DependencyGraph& g, ColorOrder order = ColorOrder::natural) {
  const std::size_t n = g.vertex_count();
  std::vector<std::size_t> vertices(n);
  std::iota(vertices.begin(), vertices.end(), 0);
  if (order == ColorOrder::degree_descending) {
    std::stable_sort(vertices.begin(), vertices.end(),
                     [&](std::size_t a, std::size_t b) { return g.degree(a) > g.degree(b); });
  }

  constexpr std::size_t kUncolored = static_cast<std::size_t>(-1);
  Coloring c;
  c.assignment.assign(n, kUncolored);
  for (std::size_t v : vertices) {
    std::vector<bool> taken(g.degree(v) + 1, false);
    for (std::size_t u : g.neighbors(v)) {
      std::size_t cu = c.assignment[u];
      if (cu != kUncolored && cu < taken.size()) taken[cu] = true;
    }
    std::size_t color = 0;
    while (taken[color]) ++color;
    c.assignment[v] = color;
    c.k = std::max(c.k, color + 1);
  }
  return c;
}

namespace detail {

inline bool k_colorable(const DependencyGraph& g, const std::vector<std::size_t>& order,
                        std::vector<std::size_t>& colors, std::size_t pos, std::size_t k) {
  if (pos == order.size()) return true;
  const std::size_t v = order[pos];
  std::size_t used_so_far = 0;
  for (std::size_t i = 0; i < pos; ++i) used_so_far = std::max(used_so_far, colors[order[i]] + 1);
  // Trying at most one fresh color prunes color-permutation symmetry.
  const std::size_t limit = std::min(k, used_so_far + 1);
  for (std::size_t c = 0; c < limit; ++c) {
    bool ok = true;
    for (std::size_t u : g.neighbors(v)) {
      if (colors[u] == c) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    colors[v] = c;
    if (k_colorable(g, order, colors, pos + 1, k)) return true;
    colors[v] = static_cast<std::size_t>(-1);
  }
  return false;
}

// Greedy clique around each vertex; its size lower-bounds chi.
inline std::size_t greedy_clique_size(const DependencyGraph& g) {
  std::size_t best = g.vertex_count() > 0 ? 1 : 0;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    std::vector<std::size_t> clique{v};
    for (std::size_t u : g.neighbors(v)) {
      bool joins = true;
      for (std::size_t w : clique) {
        if (w != u && !g.has_edge(u, w)) {
          joins = false;
          break;
        }
      }
      if (joins) clique.push_back(u);
    }
    best = std::max(best, clique.size());
  }
  return best;
}

}  // namespace detail

/// Exact chromatic number by branch and bound; refuses graphs larger than
/// vertex_limit (use the greedy upper bound there, which is sound since
/// the tail bound is monotone in chi).
inline std::size_t exact_chromatic_number(const DependencyGraph& g, std::size_t vertex_limit = 20) {
  const std::size_t n = g.vertex_count();
  if (n > vertex_limit)
    throw std::invalid_argument("graph too large for exact chromatic number; use greedy bound");
  if (n == 0) return 0;
  if (g.edge_count() == 0) return 1;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return g.degree(a) > g.degree(b); });

  const std::size_t upper = greedy_coloring(g).k;
  const std::size_t lower = detail::greedy_clique_size(g);
  for (std::size_t k = lower; k < upper; ++k) {
    std::vector<std::size_t> colors(n, static_cast<std::size_t>(-1));
    if (detail::k_colorable(g, order, colors, 0, k)) return k;
  }
  return upper;
}

/// Disjoint union of `num_blocks` cliques of `block_size` vertices each.
/// Max degree is block_size - 1 and chi equals block_size.
inline DependencyGraph make_clique_blocks(std::size_t num_blocks, std::size_t block_size) {
  if (num_blocks < 1 || block_size < 1)
    throw std::invalid_argument("num_blocks and block_size must be >= 1");
  DependencyGraph g(num_blocks * block_size);
  for (std::size_t b = 0; b < num_blocks; ++b) {
    const std::size_t base = b * block_size;
    for (std::size_t i = 0; i < block_size; ++i)
      for (std::size_t j = i + 1; j < block_size; ++j) g.add_edge(base + i, base + j);
  }
  return g;
}

/// Overlap graph of length-d windows in a string of n_positions letters:
/// vertex i is the window starting at position i, adjacent iff the windows
/// share a letter (|i-j| < d). Max degree <= 2(d-1), chi <= d.
inline DependencyGraph make_window_overlap_graph(std::size_t n_positions, std::size_t d) {
  if (n_positions < 1 || d < 1) throw std::invalid_argument("n_positions and d must be >= 1");
  if (d > n_positions) return DependencyGraph(0);
  const std::size_t windows = n_positions - d + 1;
  DependencyGraph g(windows);
  for (std::size_t i = 0; i < windows; ++i)
    for (std::size_t j = i + 1; j < windows && j - i < d; ++j) g.add_edge(i, j);
  return g;
}

/// Text format: first line "n m", then m lines "u v" with 0-based u < v.
/// Self-loops, duplicates, and out-of-range ids are rejected.
inline DependencyGraph read_graph(std::istream& in) {
  std::size_t n = 0, m = 0;
  if (!(in >> n >> m)) throw std::invalid_argument("graph header must be \"n m\"");
  DependencyGraph g(n);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t u = 0, v = 0;
    if (!(in >> u >> v)) throw std::invalid_argument("expected edge line \"u v\"");
    if (u >= v) throw std::invalid_argument("edges must satisfy u < v");
    g.add_edge(u, v);  // rejects out-of-range and duplicates
  }
  return g;
}

inline DependencyGraph read_graph(const std::string& text) {
  std::istringstream in(text);
  return read_graph(in);
}

inline void write_graph(std::ostream& out, const DependencyGraph& g) {
  out << g.vertex_count() << ' ' << g.edge_count() << '\n';
  for (std::size_t u = 0; u < g.vertex_count(); ++u)
    for (std::size_t v : g.neighbors(u))
      if (u < v) out << u << ' ' << v << '\n';
}

}  // namespace depbound
