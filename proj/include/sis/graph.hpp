#pragma once

#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sis/errors.hpp"
#include "sis/rng.hpp"

namespace sis {

using Node = std::uint32_t;

/// Undirected edge stored canonically with u < v.
struct Edge {
  Node u = 0;
  Node v = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Directed pair (from, to) as used by the q_E ordering.
struct Arc {
  Node from = 0;
  Node to = 0;

  friend auto operator<=>(const Arc&, const Arc&) = default;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Undirected simple graph on nodes 0..n-1. Immutable after construction.
///
/// Edges are kept in canonical order: pairs (i, j) with i < j, sorted
/// lexicographically. That order defines the undirected edge index used by
/// the incidence matrix and p_E. The directed index used by q_E places all
/// (i, j), i < j, first in undirected order, then all (j, i) in the same
/// order, so arc k and arc k + |E| are the two orientations of edge k.
class Graph {
 public:
  Graph() = default;

  explicit Graph(std::size_t n) : n_(n), offsets_(n + 1, 0) {}

  /// Throws ParameterError on self-loops, duplicates or out-of-range nodes.
  /// Edge orientation in the input is irrelevant.
  Graph(std::size_t n, std::vector<Edge> edges) : n_(n) {
    for (auto& e : edges) {
      if (e.u >= n || e.v >= n) {
        throw ParameterError("edge (" + std::to_string(e.u) + ", " +
                             std::to_string(e.v) + ") references a node >= " +
                             std::to_string(n));
      }
      if (e.u == e.v) {
        throw ParameterError("self-loop at node " + std::to_string(e.u));
      }
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges.begin(), edges.end());
    auto dup = std::adjacent_find(edges.begin(), edges.end());
    if (dup != edges.end()) {
      throw ParameterError("duplicate edge {" + std::to_string(dup->u) + ", " +
                           std::to_string(dup->v) + "}");
    }
    edges_ = std::move(edges);
    build_adjacency();
  }

  std::size_t node_count() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::size_t arc_count() const noexcept { return 2 * edges_.size(); }

  std::span<const Edge> edges() const noexcept { return edges_; }

  /// Sorted neighbor list N_i.
  std::span<const Node> neighbors(Node i) const {
    return {adj_.data() + offsets_[i], adj_.data() + offsets_[i + 1]};
  }

  /// Arc indices of (i, l) for l in neighbors(i), aligned with neighbors(i).
  std::span<const std::size_t> out_arcs(Node i) const {
    return {adj_arc_.data() + offsets_[i], adj_arc_.data() + offsets_[i + 1]};
  }

  std::size_t degree(Node i) const { return offsets_[i + 1] - offsets_[i]; }

  std::size_t max_degree() const {
    std::size_t d = 0;
    for (std::size_t i = 0; i < n_; ++i) d = std::max(d, degree(Node(i)));
    return d;
  }

  bool has_edge(Node i, Node j) const { return edge_index(i, j).has_value(); }

  /// Position of {i, j} in the canonical undirected order.
  std::optional<std::size_t> edge_index(Node i, Node j) const {
    if (i == j || i >= n_ || j >= n_) return std::nullopt;
    const Edge key{std::min(i, j), std::max(i, j)};
    auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
    if (it == edges_.end() || *it != key) return std::nullopt;
    return static_cast<std::size_t>(it - edges_.begin());
  }

  /// Position of (i, j) in the canonical directed order.
  std::optional<std::size_t> arc_index(Node i, Node j) const {
    auto e = edge_index(i, j);
    if (!e) return std::nullopt;
    return i < j ? *e : *e + edges_.size();
  }

  Arc arc(std::size_t k) const {
    const std::size_t m = edges_.size();
    const Edge& e = edges_[k < m ? k : k - m];
    return k < m ? Arc{e.u, e.v} : Arc{e.v, e.u};
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  void build_adjacency() {
    offsets_.assign(n_ + 1, 0);
    for (const auto& e : edges_) {
      ++offsets_[e.u + 1];
      ++offsets_[e.v + 1];
    }
    for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
    adj_.resize(offsets_[n_]);
    adj_arc_.resize(offsets_[n_]);
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    const std::size_t m = edges_.size();
    // Edges are sorted, so each neighbor list comes out sorted as well:
    // for node x, lower neighbors arrive (as e.v == x) in increasing e.u,
    // before any higher neighbor (as e.u == x) because e.u < x < e.v.
    for (std::size_t k = 0; k < m; ++k) {
      const auto& e = edges_[k];
      adj_[fill[e.v]] = e.u;
      adj_arc_[fill[e.v]++] = k + m;
    }
    for (std::size_t k = 0; k < m; ++k) {
      const auto& e = edges_[k];
      adj_[fill[e.u]] = e.v;
      adj_arc_[fill[e.u]++] = k;
    }
  }

  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Node> adj_;
  std::vector<std::size_t> adj_arc_;
};

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Node 0 is the hub.
inline Graph star(std::size_t n) {
  if (n < 2) throw InvalidSize("star needs n >= 2, got " + std::to_string(n));
  std::vector<Edge> edges;
  edges.reserve(n - 1);
  for (std::size_t i = 1; i < n; ++i) edges.push_back({0, Node(i)});
  return Graph(n, std::move(edges));
}

inline Graph cycle(std::size_t n) {
  if (n < 3) throw InvalidSize("cycle needs n >= 3, got " + std::to_string(n));
  std::vector<Edge> edges;
  edges.reserve(n);
  for (std::size_t i = 0; i < n; ++i) edges.push_back({Node(i), Node((i + 1) % n)});
  return Graph(n, std::move(edges));
}

inline Graph clique(std::size_t n) {
  if (n < 1) throw InvalidSize("clique needs n >= 1");
  std::vector<Edge> edges;
  edges.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({Node(i), Node(j)});
  return Graph(n, std::move(edges));
}

inline Graph path(std::size_t n) {
  if (n < 1) throw InvalidSize("path needs n >= 1");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({Node(i), Node(i + 1)});
  return Graph(n, std::move(edges));
}

/// Hub 0 joined to `arms` disjoint paths of `arm_length` nodes each. Arm a
/// occupies nodes 1 + a*arm_length .. (a+1)*arm_length, nearest-hub first.
inline Graph spider(std::size_t arms, std::size_t arm_length) {
  if (arms < 1 || arm_length < 1) {
    throw InvalidSize("spider needs arms >= 1 and arm_length >= 1");
  }
  const std::size_t n = 1 + arms * arm_length;
  std::vector<Edge> edges;
  edges.reserve(n - 1);
  for (std::size_t a = 0; a < arms; ++a) {
    const Node first = Node(1 + a * arm_length);
    edges.push_back({0, first});
    for (std::size_t k = 1; k < arm_length; ++k) edges.push_back({Node(first + k - 1), Node(first + k)});
  }
  return Graph(n, std::move(edges));
}

/// G(n, p): pairs visited in lexicographic order, one uniform draw each.
inline Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("erdos_renyi: p must lie in [0, 1]");
  Rng rng(seed);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.uniform() < p) edges.push_back({Node(i), Node(j)});
  return Graph(n, std::move(edges));
}

/// Watts-Strogatz small world: ring lattice joining each node to its k
/// nearest neighbors, then a single rewiring pass. For each lattice offset
/// s = 1..k/2 and each node i, the edge (i, i+s) is, with probability
/// p_rewire, replaced by (i, w) with w uniform among nodes that are neither i
/// nor already adjacent to i. Nodes adjacent to everything are skipped.
inline Graph watts_strogatz(std::size_t n, std::size_t k, double p_rewire,
                            std::uint64_t seed) {
  if (k % 2 != 0) throw ParameterError("watts_strogatz: k must be even");
  if (k >= n) throw ParameterError("watts_strogatz: k must be < n");
  if (!(p_rewire >= 0.0 && p_rewire <= 1.0)) {
    throw ParameterError("watts_strogatz: p_rewire must lie in [0, 1]");
  }
  std::vector<std::set<Node>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t s = 1; s <= k / 2; ++s) {
      const Node j = Node((i + s) % n);
      adj[i].insert(j);
      adj[j].insert(Node(i));
    }
  }
  Rng rng(seed);
  for (std::size_t s = 1; s <= k / 2; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!rng.bernoulli(p_rewire)) continue;
      const Node u = Node(i);
      const Node v = Node((i + s) % n);
      if (!adj[u].contains(v)) continue;  // already rewired away
      if (adj[u].size() + 1 >= n) continue;
      Node w;
      do {
        w = Node(rng.below(n));
      } while (w == u || adj[u].contains(w));
      adj[u].erase(v);
      adj[v].erase(u);
      adj[u].insert(w);
      adj[w].insert(u);
    }
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (Node j : adj[i])
      if (j > i) edges.push_back({Node(i), j});
  return Graph(n, std::move(edges));
}

// ---------------------------------------------------------------------------
// Matrix views
// ---------------------------------------------------------------------------

inline SparseMatrix adjacency_matrix(const Graph& g) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(2 * g.edge_count());
  for (const auto& e : g.edges()) {
    t.emplace_back(e.u, e.v, 1.0);
    t.emplace_back(e.v, e.u, 1.0);
  }
  SparseMatrix a(Eigen::Index(g.node_count()), Eigen::Index(g.node_count()));
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

/// n x |E| matrix with B[i, e] = 1 iff i is an endpoint of edge e.
inline SparseMatrix incidence_matrix(const Graph& g) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(2 * g.edge_count());
  for (std::size_t k = 0; k < g.edge_count(); ++k) {
    const auto& e = g.edges()[k];
    t.emplace_back(e.u, Eigen::Index(k), 1.0);
    t.emplace_back(e.v, Eigen::Index(k), 1.0);
  }
  SparseMatrix b(Eigen::Index(g.node_count()), Eigen::Index(g.edge_count()));
  b.setFromTriplets(t.begin(), t.end());
  return b;
}

/// Largest adjacency eigenvalue by power iteration on A + I (the shift makes
/// the iteration primitive on bipartite graphs) started from the all-ones
/// vector. The Rayleigh quotient is returned once the relative residual
/// ||Ax - lambda x|| / lambda falls below `tol`.
inline double lambda_max(const Graph& g, double tol = 1e-10,
                         std::size_t max_iter = 1'000'000) {
  const std::size_t n = g.node_count();
  if (n == 0) throw InvalidSize("lambda_max of an empty graph");
  if (g.edge_count() == 0) return 0.0;
  std::vector<double> x(n, 1.0 / std::sqrt(double(n))), ax(n);
  double lambda = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (Node j : g.neighbors(Node(i))) s += x[j];
      ax[i] = s;
    }
    double rq = 0.0, norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) rq += x[i] * ax[i];
    lambda = rq;
    double res2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = ax[i] - lambda * x[i];
      res2 += r * r;
    }
    if (std::sqrt(res2) <= tol * std::abs(lambda)) break;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += ax[i];
      norm2 += x[i] * x[i];
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& v : x) v *= inv;
  }
  return lambda;
}

// ---------------------------------------------------------------------------
// Edge-list text format: header "n m", then m lines "i j".
// ---------------------------------------------------------------------------

inline Graph read_edge_list(std::istream& in) {
  long long n = -1, m = -1;
  if (!(in >> n >> m) || n < 0 || m < 0) {
    throw IoError("edge list: expected header 'n m'");
  }
  std::vector<Edge> edges;
  edges.reserve(std::size_t(m));
  for (long long k = 0; k < m; ++k) {
    long long i = -1, j = -1;
    if (!(in >> i >> j)) {
      throw IoError("edge list: expected " + std::to_string(m) + " edges, read " +
                    std::to_string(k));
    }
    if (i < 0 || j < 0) throw IoError("edge list: negative node index");
    edges.push_back({Node(i), Node(j)});
  }
  std::string trailing;
  if (in >> trailing) throw IoError("edge list: unexpected trailing token '" + trailing + "'");
  return Graph(std::size_t(n), std::move(edges));
}

inline void write_edge_list(std::ostream& out, const Graph& g) {
  out << g.node_count() << ' ' << g.edge_count() << '\n';
  for (const auto& e : g.edges()) out << e.u << ' ' << e.v << '\n';
}

inline Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_edge_list(in);
}

inline void save_edge_list(const std::string& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_edge_list(out, g);
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace sis
