#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace gffperc {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// GFF on the d-regular tree truncated at `depth`, stored level by level.
///
/// Vertex 0 is the root; the children of every vertex are contiguous and
/// levels are contiguous, so level k occupies [level_start[k], level_start[k+1]).
struct TreeSample {
  int d = 0;
  int depth = 0;
  std::uint64_t seed = 0;
  std::vector<std::int64_t> level_start;
  std::vector<int> parent;       // -1 at the root
  std::vector<int> first_child;  // -1 on the deepest level
  std::vector<double> phi;
  std::vector<double> y;         // increments
  std::vector<double> phi1;      // pruned values, empty until prune_field
  std::vector<double> phi2;
  int pruned_depth = -1;         // phi1/phi2 valid on levels <= pruned_depth

  std::int64_t size() const { return level_start.back(); }
  int n_children(int x) const { return x == 0 ? d : (first_child[x] < 0 ? 0 : d - 1); }
  int level_of(int x) const;
};

/// Variance of phi at every vertex, (d-1)/(d-2).
inline double tree_variance(int d) { return (d - 1.0) / (d - 2.0); }
/// Tree Green function ((d-1)/(d-2)) (d-1)^{-m} at distance m.
double tree_green(int d, int distance);

/// phi(o) = Y_o, phi(x) = phi(parent)/(d-1) + Y_x with Y_o ~ N(0,(d-1)/(d-2)),
/// Y_x ~ N(0, d/(d-1)). Stream (seed, tree, index).
TreeSample sample_tree(int d, int depth, std::uint64_t seed, std::uint64_t index = 0);

/// Uniform marks U(x); iota(x) = 1 iff U(x) <= p, so the marks are nested in p.
std::vector<double> tree_marks(const TreeSample& ts, std::uint64_t seed_iota);

struct TreeComponent {
  std::vector<int> vertices;               // BFS order
  std::vector<std::int64_t> level_counts;  // levels 0..reported depth
};

/// Root component of {phi >= h, iota = 1, sum_{children} phi >= gamma},
/// reported on levels 0..depth-1 (the deepest level has no children).
/// gamma = kNegInf drops the children condition.
TreeComponent robust_component(const TreeSample& ts, double h, double p, double gamma,
                               std::uint64_t seed_iota);
TreeComponent robust_component(const TreeSample& ts, double h, std::span<const double> marks,
                               double p, double gamma);

/// Largest t accepted by prune_field.
inline constexpr double kPruneTMax = 0.5;

/// Fills phi2 with its exact conditional law given phi and phi1 = phi - phi2
/// on levels 0..depth-1:
///   phi2 = (t^2/2)(phi(x) - (1/d) sum_{z~x} phi(z)) + psi,
///   Cov psi = (t^2/2 - t^4/4) delta + (t^4/(4d)) 1_{x~y}.
/// psi(x) = u eps_x + v sum_{edges e at x} eta_e with v^2 = t^4/(4d) and
/// u^2 = t^2/2 - t^4/2. Stream (seed, prune, index).
void prune_field(TreeSample& ts, double t, std::uint64_t seed, std::uint64_t index = 0);

/// Root component of {phi >= h, phi1 >= h, iota = 1} on levels 0..pruned_depth.
TreeComponent pruned_component(const TreeSample& ts, double h, double p, std::uint64_t seed_iota);

struct EtaEstimate {
  int d = 0;
  double h = 0, p = 1, gamma = kNegInf;
  int depth = 0;
  long replicas = 0;
  double survival_fraction = 0;
  double ci_halfwidth = 0;
  std::vector<double> mean_front;  // mean |C cap S(o,k)| for k = 0..depth-1
  std::vector<std::vector<std::int64_t>> fronts;  // per replica, if requested
};

/// Fraction of replicas whose robust root component reaches level depth-1.
/// Branching exploration: children are only generated for vertices in the
/// component, so cost is proportional to the component size.
/// Replica r uses stream (seed, tree, r).
EtaEstimate estimate_eta(int d, double h, double p, double gamma, int depth, long replicas,
                         std::uint64_t seed, int threads = 1, bool keep_fronts = false);

/// One replica of the exploration; returns front sizes on levels 0..depth-1.
std::vector<std::int64_t> explore_robust(int d, double h, double p, double gamma, int depth,
                                         std::uint64_t seed, std::uint64_t index);

}  // namespace gffperc
