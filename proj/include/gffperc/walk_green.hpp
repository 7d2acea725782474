#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gffperc/graph.hpp"

namespace gffperc {

/// (P f)(x) = f(x)/2 + (1/(2d)) sum_{y~x} f(y) for the lazy walk.
std::vector<double> lazy_step(const Graph& g, std::span<const double> f);

/// Dense zero-average Green function of the lazy walk.
///
/// `gbar(x, y)` holds g(x,y) = G(x,y)/d where G(x,y) = sum_k (P^k(x,y) - 1/N).
/// The field covariance is c0 * gbar with c0 = d/2.
struct GreenTable {
  const Graph* base = nullptr;
  Eigen::MatrixXd gbar;
  double c0 = 0.0;

  /// G = d * gbar.
  Eigen::MatrixXd green() const { return gbar * base->degree(); }
};

inline constexpr int kDefaultGreenCap = 4096;

/// Solves (I - P + 1 pi^T) G = I - 1 pi^T, whose matrix is positive definite
/// for a connected graph. Throws SizeCapError above `cap` vertices and
/// NumericalError if the factorisation fails.
GreenTable zero_average_green(const Graph& g, int cap = kDefaultGreenCap);

/// Truncated series sum_{k <= terms} (P^k - 1 pi^T); validation only.
Eigen::MatrixXd green_by_series(const Graph& g, int terms);

/// Entrywise c0 * gbar.
Eigen::MatrixXd covariance_table(const GreenTable& table);

/// CSV with header "i,j,value", row-major.
void write_covariance_csv(std::ostream& out, const Eigen::MatrixXd& cov);

/// Envelope gbar(x,y) <= C (d-1)^{-dist(x,y)} + N^{-eps}.
///
/// eps is read off the far pairs (distance >= half the diameter) and C is the
/// smallest constant making the bound hold over all pairs for that eps.
struct GreenDecayFit {
  std::vector<double> max_by_distance;  // max gbar over pairs at each distance
  double c = 0.0;
  double epsilon = 0.0;
};
GreenDecayFit fit_green_decay(const GreenTable& table);

/// Return probabilities P^k(x, x) for k = 0..k_max.
std::vector<double> lazy_return_probabilities(const Graph& g, int x, int k_max);

}  // namespace gffperc
