#include "gffperc/operator.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "gffperc/errors.hpp"
#include "gffperc/rng.hpp"

namespace gffperc {

namespace {

double log_normal_density(double x, double var) {
  return -0.5 * x * x / var - 0.5 * std::log(2 * std::numbers::pi * var);
}

// P(N(0,1) >= z).
double upper_tail(double z) { return 0.5 * boost::math::erfc(z / std::numbers::sqrt2); }

double tail_factor(int d, double gamma, double a, double y) {
  if (std::isinf(gamma) && gamma < 0) return 1.0;
  const double mean = (d - 2.0) * a / (d - 1.0);
  const double sd = std::sqrt((d - 2.0) * d / (d - 1.0));
  return upper_tail((gamma - y - mean) / sd);
}

void validate(int d, double p, double gamma) {
  if (d < 3) throw InvalidArgument("d must be at least 3");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("p must lie in [0, 1]");
  if (std::isnan(gamma)) throw InvalidArgument("gamma is NaN");
}

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace

double kernel_value(int d, double h, double p, double gamma, double a, double y) {
  if (a < h || y < h) return 0.0;
  const double lk = std::log(d - 1.0) + log_normal_density(y - a / (d - 1.0), d / (d - 1.0)) -
                    log_normal_density(y, nu_variance(d));
  return p * std::exp(lk) * tail_factor(d, gamma, a, y);
}

Eigen::MatrixXd OperatorGrid::matrix() const {
  Eigen::Map<const Eigen::VectorXd> w(weights.data(), static_cast<Eigen::Index>(weights.size()));
  return kernel * w.asDiagonal();
}

OperatorGrid build_operator(int d, double h, double p, double gamma, int n_nodes,
                            double h_max_sigmas) {
  validate(d, p, gamma);
  if (n_nodes < 32) throw InvalidArgument("n_nodes must be at least 32");
  if (std::isnan(h) || (std::isinf(h) && h > 0)) throw InvalidArgument("h must be finite or -inf");
  const double sd = std::sqrt(nu_variance(d));
  const double lo = std::isinf(h) ? -h_max_sigmas * sd : h;
  const double hi = std::max(lo, 0.0) + h_max_sigmas * sd;

  OperatorGrid og;
  og.d = d;
  og.h = h;
  og.p = p;
  og.gamma = gamma;
  std::vector<double> x, w;
  gauss_legendre(n_nodes, x, w);
  og.nodes.resize(n_nodes);
  og.weights.resize(n_nodes);
  const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
  for (int i = 0; i < n_nodes; ++i) {
    og.nodes[i] = mid + half * x[i];
    og.weights[i] = half * w[i] * std::exp(log_normal_density(og.nodes[i], nu_variance(d)));
  }
  og.kernel.resize(n_nodes, n_nodes);
  for (int i = 0; i < n_nodes; ++i)
    for (int j = 0; j < n_nodes; ++j)
      og.kernel(i, j) = kernel_value(d, lo, p, gamma, og.nodes[i], og.nodes[j]);
  return og;
}

double apply_at(const OperatorGrid& og, const std::function<double(double)>& f, double a) {
  double s = 0.0;
  for (std::size_t j = 0; j < og.nodes.size(); ++j)
    s += kernel_value(og.d, og.h, og.p, og.gamma, a, og.nodes[j]) * og.weights[j] * f(og.nodes[j]);
  return s;
}

double apply_monte_carlo(int d, double h, double p, double gamma,
                         const std::function<double(double)>& f, double a, long samples,
                         std::uint64_t seed) {
  validate(d, p, gamma);
  if (a < h) return 0.0;
  NormalSource src(seed, Stream::replica);
  const double sd = std::sqrt(d / (d - 1.0));
  const double base = a / (d - 1.0);
  double acc = 0.0;
  for (long s = 0; s < samples; ++s) {
    double sum = 0.0, y1 = 0.0;
    for (int i = 0; i < d - 1; ++i) {
      double yi = base + src(sd);
      if (i == 0) y1 = yi;
      sum += yi;
    }
    if (sum >= gamma && y1 >= h) acc += f(y1);
  }
  return p * (d - 1.0) * acc / static_cast<double>(samples);
}

double nu_inner(const OperatorGrid& og, std::span<const double> f, std::span<const double> g) {
  double s = 0.0;
  for (std::size_t j = 0; j < og.weights.size(); ++j) s += og.weights[j] * f[j] * g[j];
  return s;
}

EigenResult principal_eigen(const OperatorGrid& og, double tol, int max_iter) {
  const Eigen::MatrixXd m = og.matrix();
  const int n = static_cast<int>(og.nodes.size());
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n), next(n);
  auto norm = [&](const Eigen::VectorXd& x) {
    return std::sqrt(nu_inner(og, {x.data(), static_cast<std::size_t>(n)},
                              {x.data(), static_cast<std::size_t>(n)}));
  };
  v /= norm(v);
  double lambda = 0.0;
  EigenResult res;
  for (int it = 1;; ++it) {
    next.noalias() = m * v;
    lambda = norm(next);
    if (!(lambda > 0)) throw NumericalError("operator annihilated the iterate");
    res.residual = norm(next - lambda * v);
    v = next / lambda;
    if (res.residual <= tol) {
      res.iterations = it;
      break;
    }
    if (it == max_iter) throw NumericalError("power iteration did not converge");
  }
  res.lambda = lambda;
  res.chi.assign(v.data(), v.data() + n);
  return res;
}

double lambda_h(int d, double h, int n_nodes) {
  return principal_eigen(build_operator(d, h, 1.0, kNegInf, n_nodes)).lambda;
}

double h_star(int d, double tol, const HStarConfig& cfg) {
  auto f = [&](double h) {
    return principal_eigen(build_operator(d, h, 1.0, kNegInf, cfg.n_nodes, cfg.h_max_sigmas)).lambda - 1.0;
  };
  double lo = cfg.lo, hi = cfg.hi;
  if (!(f(lo) > 0 && f(hi) < 0))
    throw NumericalError("h_star bracket [" + std::to_string(lo) + ", " + std::to_string(hi) +
                         "] does not straddle lambda = 1");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> lambda_limit_check(int d, double h, double p,
                                       std::span<const double> gammas, int n_nodes) {
  std::vector<double> out;
  for (double g : gammas) out.push_back(principal_eigen(build_operator(d, h, p, g, n_nodes)).lambda);
  return out;
}

}  // namespace gffperc
