#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace gffperc {

enum class GraphMethod { configuration_model, explicit_edges };

/// Immutable simple connected d-regular graph on vertices 0..N-1.
///
/// Neighbor lists are sorted ascending. Edges are numbered 0..|E|-1 in
/// lexicographic order of (u, v) with u < v; `incident_edges(x)` is aligned
/// with `neighbors(x)` so that edge `incident_edges(x)[j]` joins x and
/// `neighbors(x)[j]`.
class Graph {
 public:
  /// Validates regularity, simplicity and connectivity.
  static Graph from_edges(int n, std::span<const std::pair<int, int>> edges,
                          std::uint64_t seed = 0,
                          GraphMethod method = GraphMethod::explicit_edges);

  int n_vertices() const { return n_; }
  int degree() const { return d_; }
  std::int64_t n_edges() const { return static_cast<std::int64_t>(edges_.size()); }
  std::uint64_t seed() const { return seed_; }
  GraphMethod method() const { return method_; }

  std::span<const int> neighbors(int x) const {
    return {adjacency_.data() + static_cast<std::size_t>(x) * d_,
            static_cast<std::size_t>(d_)};
  }
  std::span<const int> incident_edges(int x) const {
    return {incident_.data() + static_cast<std::size_t>(x) * d_,
            static_cast<std::size_t>(d_)};
  }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  bool adjacent(int x, int y) const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.d_ == b.d_ && a.adjacency_ == b.adjacency_;
  }

 private:
  Graph() = default;

  int n_ = 0;
  int d_ = 0;
  std::uint64_t seed_ = 0;
  GraphMethod method_ = GraphMethod::explicit_edges;
  std::vector<int> adjacency_;
  std::vector<int> incident_;
  std::vector<std::pair<int, int>> edges_;
};

/// Configuration model with rejection of loops, multi-edges and disconnected
/// outcomes. Deterministic given (n, d, seed).
Graph build_random_regular(int n, int d, std::uint64_t seed,
                           int max_retries = 1000);

/// Complete graph K_n (the unique (n-1)-regular graph on n vertices).
Graph complete_graph(int n);

/// Vertices of B(x, r) in BFS order together with their distances from x.
struct Ball {
  std::vector<int> vertices;
  std::vector<int> distance;  // aligned with vertices
};
Ball ball(const Graph& g, int x, int r);

/// True iff the induced subgraph on B(x, r) has no cycle.
bool is_treelike(const Graph& g, int x, int r);

/// Cyclomatic number |E(B)| - |V(B)| + 1 of the induced ball B(x, r).
std::int64_t ball_cycle_rank(const Graph& g, int x, int r);

/// |B_{T_d}(o, r)| = (d(d-1)^r - 2)/(d - 2).
std::int64_t tree_ball_size(int d, int r);

/// Outer vertex boundary: vertices outside `set` with a neighbor in it.
std::vector<int> vertex_boundary(const Graph& g, std::span<const int> set);

/// All-pairs-free BFS distances from one source.
std::vector<int> bfs_distances(const Graph& g, int source);

/// Edge-list text format: header "# n=<N> d=<d> seed=<seed>", then "u v"
/// with u < v, one edge per line.
void write_edge_list(std::ostream& out, const Graph& g);
Graph read_edge_list(std::istream& in);

}  // namespace gffperc
