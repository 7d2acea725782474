#pragma once

#include <span>
#include <vector>

#include "gffperc/graph.hpp"

namespace gffperc {

/// The graph obtained by placing a vertex on every edge of a base graph.
///
/// Vertices 0..N-1 are the original vertices, N..N+|E|-1 the midpoints in
/// lexicographic edge order. The walk Q on this graph moves from an original
/// vertex to one of its d incident midpoints and from a midpoint to one of its
/// two endpoints, uniformly.
class MidpointGraph {
 public:
  explicit MidpointGraph(const Graph& base) : base_(&base) {}

  const Graph& base() const { return *base_; }
  int n_original() const { return base_->n_vertices(); }
  int n_total() const { return base_->n_vertices() + static_cast<int>(base_->n_edges()); }
  bool is_midpoint(int v) const { return v >= n_original(); }

  /// pi~: d on original vertices, 2 on midpoints.
  double weight(int v) const { return is_midpoint(v) ? 2.0 : base_->degree(); }
  /// w: +1 on original vertices, -1 on midpoints.
  double parity(int v) const { return is_midpoint(v) ? -1.0 : 1.0; }
  std::vector<double> weights() const;
  std::vector<double> parity_vector() const;

  /// Degree in the midpoint graph.
  int degree(int v) const { return is_midpoint(v) ? 2 : base_->degree(); }
  std::vector<int> neighbors(int v) const;

  /// out = Q f (both of length n_total). `out` must not alias `f`.
  void apply_walk(std::span<const double> f, std::span<double> out) const;

 private:
  const Graph* base_;
};

inline MidpointGraph midpoint_graph(const Graph& g) { return MidpointGraph(g); }

}  // namespace gffperc
