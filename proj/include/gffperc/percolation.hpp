#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gffperc/graph.hpp"

namespace gffperc {

/// {x : f(x) >= h} as a 0/1 mask.
std::vector<char> level_set(std::span<const double> f, double h);

/// Connected components of the subgraph induced by a vertex mask.
///
/// Component ids are ordered by size (descending, ties by smallest vertex),
/// so id 0 is the largest component. Vertices outside the mask have id -1.
struct ComponentStats {
  double h = 0.0;
  std::vector<int> component;
  std::vector<std::int64_t> sizes;

  std::int64_t c_max() const { return sizes.empty() ? 0 : sizes[0]; }
  std::int64_t c_sec() const { return sizes.size() < 2 ? 0 : sizes[1]; }
  std::int64_t set_size() const;
  /// Number of vertices in components of size >= m.
  std::int64_t mesoscopic_count(std::int64_t m) const;
};

ComponentStats components(const Graph& g, std::span<const char> mask, double h = 0.0);
ComponentStats level_components(const Graph& g, std::span<const double> f, double h);

/// Fraction of vertices x whose component lies inside B(x, r/2). Vertices
/// outside the level set have an empty component and count as small.
double small_component_fraction(const Graph& g, std::span<const double> f, double h, int r);

struct ReducedGraphParams {
  double K = 0.0;  // floor for Psi^1
  double L = 0.0;  // floor for Z-bar
  double p = 1.0;  // P(Z-bar >= L)
  double t = 0.0;
};

/// L with P(Z >= L) = p for Z ~ N(0, 1/2); -inf at p = 1.
double l_from_p(double p);

/// Mask {Psi^1 >= h} & {Psi >= h} & {Z-bar >= L} & {Psi^1 >= K}.
std::vector<char> mesoscopic_mask(std::span<const double> psi1, std::span<const double> psi,
                                  std::span<const double> zbar, const ReducedGraphParams& rgp,
                                  double h);

struct MesoscopicResult {
  std::int64_t threshold = 0;  // ceil(N^c)
  std::int64_t count = 0;      // vertices in components of size >= threshold
  std::int64_t n_components = 0;
  ComponentStats stats;
};

MesoscopicResult mesoscopic_scan(const Graph& g, std::span<const double> psi1,
                                 std::span<const double> psi, std::span<const double> zbar,
                                 const ReducedGraphParams& rgp, double h, double c);

/// Largest r such that at least `fraction` of the vertices are 2r-treelike,
/// and c1 = r / ln N.
struct TreelikeScale {
  int r = 0;
  double c1 = 0.0;
  std::vector<double> profile;  // fraction of k-treelike vertices, k = 0..2 r_max
};
TreelikeScale treelike_scale(const Graph& g, double fraction = 0.9, int r_max = 6);

/// c1 * ln(p * lambda * (1 - 2 delta')); throws unless the argument exceeds 1.
double mesoscopic_exponent(double c1, double p, double lambda, double delta_prime);

struct BadSetCounts {
  std::int64_t b1 = 0;  // #{Z-bar < L}
  std::int64_t b2 = 0;  // #{Psi^1 < K}
};
BadSetCounts bad_set_counts(std::span<const double> psi1, std::span<const double> zbar, double K,
                            double L);

struct GiantResult {
  int n = 0, d = 0;
  double h = 0.0;
  std::uint64_t seed = 0;
  int k_max = 0;
  double gap = 0.0;
  std::int64_t level_size = 0;
  std::int64_t c_max = 0, c_sec = 0;
};

/// Random d-regular graph and decomposition field from `seed`, then level-set
/// components at h. k_max = 0 selects ceil(40 / gap).
GiantResult giant_experiment(int n, int d, double h, std::uint64_t seed, int k_max = 0);

struct SprinkleConfig {
  int n = 10000, d = 3;
  double h = 0.0, h_prime = 0.2, p = 0.95;
  std::optional<double> t;  // default 1 / ln N
  double delta = 0.2, delta_prime = 0.05;
  double K0 = -1.0;          // K = min(h, K0)
  double beta_prime = 0.1;   // only enters the reported t-schedule check
  double treelike_fraction = 0.9;
  int k_max = 0;             // 0: ceil(40 / gap)
  double eta_ref = 0.0;      // eta(h', p)
  double lambda_ref = 0.0;   // lambda_{h'}; 0: computed
};

struct SprinkleRecord {
  std::uint64_t seed = 0;
  int n = 0, d = 0;
  double h = 0.0, h_prime = 0.0, p = 0.0, t = 0.0, L = 0.0, K = 0.0;
  double c1 = 0.0, c_hprime = 0.0;
  std::int64_t m_n = 0;
  std::int64_t meso_count = 0, meso_components = 0;
  std::int64_t fixed_components = 0, fixed_mass = 0, fixed_in_giant = 0;
  bool a3 = false;          // meso_count >= (1 - delta) eta_ref N
  double centering = 0.0;   // |mean Z-bar|
  bool centering_ok = false;
  bool contained = false;   // every fixed vertex lies in the level set of the sprinkled field
  bool tnfix_ok = false;
  std::int64_t c_max = 0, c_sec = 0;
  bool merged = false;
  double eta_ref = 0.0;
};

SprinkleRecord sprinkling_run(const SprinkleConfig& cfg, std::uint64_t seed);

/// One JSON object on a single line.
std::string to_json_line(const SprinkleRecord& rec);

}  // namespace gffperc
