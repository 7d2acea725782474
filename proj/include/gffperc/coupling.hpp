#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gffperc/graph.hpp"
#include "gffperc/midpoint.hpp"

namespace gffperc {

/// Canonical BFS labelling of a treelike ball B(x, R): tree vertex 0 is x,
/// children are ordered by graph id. Tree midpoints are indexed by their
/// child endpoint (the edge to the parent).
struct TreeBall {
  int radius = 0;
  std::vector<int> graph_id;    // tree vertex -> graph vertex
  std::vector<int> parent;      // -1 at the root
  std::vector<int> level;
  std::vector<int> edge_id;     // tree vertex c -> graph edge {c, parent(c)}, -1 at the root
  std::vector<std::vector<int>> children;
  std::vector<int> rho;         // graph vertex -> tree vertex, -1 outside the ball

  int size() const { return static_cast<int>(graph_id.size()); }
  /// Number of tree vertices on levels <= r (they come first in BFS order).
  int prefix(int r) const;
};

/// Throws InvalidArgument if x is not R-treelike.
TreeBall tree_ball(const Graph& g, int x, int radius);

enum class CouplingMode {
  local,  // explicit layers k <= 2r, graph tail as an exact Gaussian vector on the balls
  full,   // every layer explicit on all of G~ (standalone sampler stream)
};

/// Graph-dependent part of the coupling for a fixed pair (x, x'), radius r
/// and truncation k_max.
struct CouplingPlan {
  const Graph* g = nullptr;
  int x = 0, xp = 0, r = 0, k_max = 0;
  CouplingMode mode = CouplingMode::local;
  TreeBall ball_x, ball_xp;        // radius 2r
  std::vector<int> support;        // B(x,r) then B(x',r), graph ids in tree order
  Eigen::MatrixXd graph_tail_cov;  // on support, sum_{2r<k<=k_max} (1/2)(P^k - 1/N)
  Eigen::MatrixXd tree_tail_cov;   // on B_T(o,r), sum_{2r<k<=k_max} (1/2) P_T^k
  Eigen::MatrixXd graph_tail_factor;
  Eigen::MatrixXd tree_tail_factor;
};

/// First pair (x, x') in vertex order with both 2r-treelike and dist(x, x') > 4r.
std::optional<std::pair<int, int>> find_coupling_pair(const Graph& g, int r);

/// Checks that x, x' are 2r-treelike with disjoint 2r-balls and k_max >= 2r.
CouplingPlan plan_coupling(const Graph& g, int x, int xp, int r, int k_max,
                           CouplingMode mode = CouplingMode::local);

/// Lazy-walk transition probabilities between two vertices of the d-regular
/// tree at distance m after k steps, for m = 0..m_max and k = 0..k_max.
/// Computed from the birth-death chain of the distance to the start.
std::vector<std::vector<double>> tree_lazy_kernel(int d, int k_max, int m_max);

/// (1/2) sum_{k_lo < k <= k_hi} P_T^k at each distance m = 0..m_max.
std::vector<double> tree_tail_profile(int d, int k_lo, int k_hi, int m_max);

struct CoupledSample {
  int r = 0;
  std::vector<int> support;  // graph ids: B(x,r) then B(x',r)
  int n_x = 0;               // |B(x,r)|
  std::vector<double> psi;   // Psi on support
  std::vector<double> phi;   // phi(rho(y)) on support (phi' on the x' block)
  // Pieces of the discrepancy identity, all on support.
  std::vector<double> graph_tail;  // sum_{2r<k<=k_max} xi^k
  std::vector<double> pi_terms;    // sum_{k<=2r} (Pi Q^k Z_k)
  std::vector<double> tree_tail;   // sum_{2r<k<=k_max} zeta^k
  long shared_entries = 0;         // number of (k, vertex) identifications
  bool sharing_exact = false;      // every identified tree entry equals its graph entry bitwise
};

/// One draw of the coupling. Graph layers come from (seed, z_layers, replica),
/// the graph tail from (seed, coupling, replica), the tree tail of the ball
/// centred at c from (seed, tree, replica * N + c).
CoupledSample build_coupled(const CouplingPlan& plan, std::uint64_t seed, std::uint64_t replica);

/// (D(x, r), D(x', r)).
std::pair<double, double> measure_D(const CoupledSample& cs);

/// max_y |(Psi - phi)(y) - (graph_tail - pi_terms - tree_tail)(y)|.
double identity_error(const CoupledSample& cs);

}  // namespace gffperc
