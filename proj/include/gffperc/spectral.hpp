#pragma once

#include <cstdint>
#include <vector>

#include "gffperc/graph.hpp"

namespace gffperc {

/// Spectral gap 1 - mu_2 of the lazy walk (1/2 stay, 1/(2 deg) per neighbor).
/// Dense symmetric eigensolve up to `dense_limit` vertices, Lanczos above.
double spectral_gap(const Graph& g, int dense_limit = 1024);

/// Same quantity for an arbitrary connected graph given by adjacency lists
/// (degrees may vary). Dense; intended for small oracle graphs.
double spectral_gap_dense(const std::vector<std::vector<int>>& adjacency);

/// Lanczos with full reorthogonalisation on the adjacency operator restricted
/// to the orthogonal complement of the constants.
double spectral_gap_lanczos(const Graph& g, int iterations = 200, std::uint64_t seed = 1);

struct AssumptionReport {
  double alpha = 0.0;
  int alpha_radius = 0;             // floor(alpha * log_{d-1} N)
  double treelike_fraction = 0.0;   // strictly treelike at alpha_radius
  double one_cycle_fraction = 0.0;  // at most one cycle at alpha_radius
  double spectral_gap = 0.0;
  double min_expansion_sampled = 0.0;  // min |boundary A| / |A| over sampled A
};

AssumptionReport assumption_report(const Graph& g, double alpha, int subset_samples,
                                   std::uint64_t seed);

/// Fraction of r-treelike vertices for r = 0..r_max.
std::vector<double> treelike_profile(const Graph& g, int r_max);

/// Minimum of |boundary A|/|A| over sampled sets with |A| <= N/2: BFS-grown
/// connected sets of random size and uniformly random subsets.
double min_expansion_sampled(const Graph& g, int samples, std::uint64_t seed);

}  // namespace gffperc
