#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gffperc/graph.hpp"
#include "gffperc/midpoint.hpp"
#include "gffperc/rng.hpp"

namespace gffperc {

enum class Provenance { cholesky, decomposition, split1, split2, bar2, sum };

std::string to_string(Provenance p);

/// A real function on the original vertices of a graph.
struct Field {
  std::vector<double> values;
  Provenance provenance = Provenance::decomposition;
  std::uint64_t seed = 0;
  std::optional<double> t;
  std::optional<int> k_max;

  double sum() const;
};

/// Centered Gaussian vectors with a given rank-deficient covariance.
///
/// The covariance is factorised as V sqrt(L) over its eigenpairs, dropping
/// eigenvalues below `tol * max eigenvalue` (the constant direction).
class ExactSampler {
 public:
  explicit ExactSampler(const Eigen::MatrixXd& cov, double tol = 1e-8);

  Field sample(std::uint64_t seed) const;
  void sample_into(NormalSource& src, std::span<double> out) const;
  int dimension() const { return static_cast<int>(factor_.rows()); }
  int rank() const { return static_cast<int>(factor_.cols()); }

 private:
  Eigen::MatrixXd factor_;
};

Field sample_exact(const Eigen::MatrixXd& cov, std::uint64_t seed);

/// (Pi f)(x) for an original vertex x: the average of f over original vertices.
double project_pi(const MidpointGraph& mg, std::span<const double> f, int x);

/// Standard deviations of Z_k on G~: sqrt(1/2) on originals, sqrt(d/4) on midpoints.
inline double z_sd(const MidpointGraph& mg, int v) {
  return mg.is_midpoint(v) ? std::sqrt(mg.base().degree() / 4.0) : std::sqrt(0.5);
}

/// Z-layers behind one decomposition sample.
///
/// `layers[k]` is Z_k on all of G~; only layer 0 is retained unless all
/// layers were requested. `higher` is sum_{k>=1} xi^k on the original
/// vertices, which is all the split needs besides Z_0.
struct ZLayers {
  int k_max = 0;
  std::vector<std::vector<double>> layers;
  std::vector<double> higher;
  bool complete() const { return static_cast<int>(layers.size()) == k_max + 1; }
};

/// Default truncation ceil(40 / gap).
int default_k_max(double gap);

/// Smallest k_max whose truncation bias on the covariance,
/// max_{x,y} |(1/2) sum_{k > k_max} (P^k(x,y) - 1/N)|, is at most `bias`.
/// Uses the dense Green table, so only for small graphs.
int k_max_for_bias(const Graph& g, double bias);

/// xi^k = (Id - Pi) Q^k z restricted to the original vertices.
std::vector<double> layer_term(const MidpointGraph& mg, std::span<const double> z, int k);

/// Psi = sum_{k <= k_max} (Id - Pi) Q^k Z_k, evaluated by Horner's rule
/// from layer k_max down. Layers are drawn in that order from the stream
/// (seed, z_layers, index).
std::pair<Field, ZLayers> sample_decomposition(const MidpointGraph& mg, int k_max,
                                               std::uint64_t seed, std::uint64_t index = 0,
                                               bool keep_layers = false);

/// Conditional re-split of an existing Z_0:
/// Z0^1 = sqrt(1-t^2) Z0 + t E, Z0^2 = t Z0 - sqrt(1-t^2) E with fresh E of the
/// same law, so that Z0 = sqrt(1-t^2) Z0^1 + t Z0^2 with Z0^1, Z0^2 i.i.d.
/// Returns (Psi^1, Psi^2) with Psi^1 + Psi^2 equal to the decomposition field.
std::pair<Field, Field> split_sprinkle(const MidpointGraph& mg, const ZLayers& zl, double t,
                                       std::uint64_t seed2, std::uint64_t index = 0);

/// Fresh split: Z0^1, Z0^2 drawn independently, Z_0 defined from them.
struct SplitSample {
  Field psi1;
  Field psi2;
  Field psi;
};
SplitSample sample_split(const MidpointGraph& mg, int k_max, double t, std::uint64_t seed,
                         std::uint64_t index = 0);

/// Z-bar i.i.d. N(0, 1/2) on the original vertices.
std::vector<double> sample_bar_z2(const Graph& g, std::uint64_t seed, std::uint64_t index = 0);
/// t (zbar - mean(zbar)).
Field bar_psi2(std::span<const double> zbar, double t, std::uint64_t seed = 0);
Field sample_bar_psi2(const Graph& g, double t, std::uint64_t seed, std::uint64_t index = 0);

/// Entrywise sum with provenance `sum`.
Field add_fields(const Field& a, const Field& b);

/// "vertex,value" CSV and the JSON sidecar {provenance, seed, t, k_max}.
void write_field_csv(std::ostream& out, const Field& f);
void write_field_sidecar(std::ostream& out, const Field& f);

}  // namespace gffperc
