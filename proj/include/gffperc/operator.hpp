#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gffperc/tree_gff.hpp"

namespace gffperc {

/// Quadrature discretisation of L_h^{p,gamma} on [h, h_max].
///
/// (L f)(a) = sum_j kernel(i, j) weights[j] f(nodes[j]) at a = nodes[i], where
/// weights are Gauss-Legendre weights times the density of nu.
struct OperatorGrid {
  int d = 3;
  double h = 0.0;
  double p = 1.0;
  double gamma = kNegInf;
  std::vector<double> nodes;
  std::vector<double> weights;
  Eigen::MatrixXd kernel;

  double lower() const { return nodes.empty() ? h : nodes.front(); }
  /// Matrix of the discretised operator, kernel(i, j) * weights[j].
  Eigen::MatrixXd matrix() const;
};

/// Variance of nu, (d-1)/(d-2).
inline double nu_variance(int d) { return (d - 1.0) / (d - 2.0); }

/// K_h^{p,gamma}(a, y) for a, y >= h (zero otherwise).
double kernel_value(int d, double h, double p, double gamma, double a, double y);

/// Nodes on [h, max(h, 0) + h_max_sigmas * sd(nu)]; h = kNegInf uses
/// -h_max_sigmas * sd(nu) as the lower end.
OperatorGrid build_operator(int d, double h, double p, double gamma, int n_nodes = 256,
                            double h_max_sigmas = 8.0);

/// (L f)(a) at an arbitrary point a using the grid's quadrature in y.
double apply_at(const OperatorGrid& og, const std::function<double(double)>& f, double a);

/// Monte Carlo evaluation of (L f)(a) straight from the expectation over the
/// d-1 children increments.
double apply_monte_carlo(int d, double h, double p, double gamma,
                         const std::function<double(double)>& f, double a, long samples,
                         std::uint64_t seed);

struct EigenResult {
  double lambda = 0.0;
  std::vector<double> chi;  // at the nodes, unit norm in L^2(nu)
  int iterations = 0;
  double residual = 0.0;    // ||L chi - lambda chi||_{L^2(nu)}
};

/// Power iteration from the constant function with L^2(nu) normalisation,
/// stopped once ||L v - lambda v|| <= tol. Throws NumericalError without
/// convergence.
EigenResult principal_eigen(const OperatorGrid& og, double tol = 1e-11, int max_iter = 100000);

/// <f, g> in L^2(nu) on the grid.
double nu_inner(const OperatorGrid& og, std::span<const double> f, std::span<const double> g);

double lambda_h(int d, double h, int n_nodes = 256);

struct HStarConfig {
  double lo = 0.0;
  double hi = 5.0;
  int n_nodes = 256;
  double h_max_sigmas = 8.0;
};

/// Bisection on lambda_h = 1 until the bracket is narrower than tol.
/// Throws NumericalError if the initial bracket does not straddle 1.
double h_star(int d, double tol = 1e-6, const HStarConfig& cfg = {});

/// lambda_h^{p,gamma_i} for each gamma in the sequence.
std::vector<double> lambda_limit_check(int d, double h, double p,
                                       std::span<const double> gammas, int n_nodes = 256);

}  // namespace gffperc
