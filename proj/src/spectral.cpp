#include "gffperc/spectral.hpp"

#include <limits>
#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "gffperc/errors.hpp"
#include "gffperc/rng.hpp"

namespace gffperc {

double spectral_gap_dense(const std::vector<std::vector<int>>& adjacency) {
  const int n = static_cast<int>(adjacency.size());
  if (n < 2) throw InvalidArgument("spectral gap needs at least two vertices");
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(n, n) * 0.5;
  for (int x = 0; x < n; ++x) {
    const double dx = static_cast<double>(adjacency[x].size());
    for (int y : adjacency[x]) {
      const double dy = static_cast<double>(adjacency[y].size());
      s(x, y) += 0.5 / std::sqrt(dx * dy);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver failed");
  return 1.0 - solver.eigenvalues()(n - 2);
}

double spectral_gap_lanczos(const Graph& g, int iterations, std::uint64_t seed) {
  const int n = g.n_vertices();
  const int d = g.degree();
  const int m = std::min(iterations, n - 1);
  Eigen::MatrixXd basis(n, m);
  std::vector<double> alpha(m, 0.0);
  std::vector<double> beta(m, 0.0);

  NormalSource normal(seed, Stream::replica, 0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = normal();
  v.array() -= v.mean();
  v.normalize();

  Eigen::VectorXd w(n);
  int steps = 0;
  for (int j = 0; j < m; ++j) {
    basis.col(j) = v;
    ++steps;
    for (int x = 0; x < n; ++x) {
      double acc = 0.0;
      for (int y : g.neighbors(x)) acc += v(y);
      w(x) = acc;
    }
    alpha[j] = w.dot(v);
    // Full reorthogonalisation against the constants and the Krylov basis.
    w.array() -= w.mean();
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd coeff = basis.leftCols(j + 1).transpose() * w;
      w -= basis.leftCols(j + 1) * coeff;
    }
    const double b = w.norm();
    if (j + 1 == m || b < 1e-12) break;
    beta[j] = b;
    v = w / b;
  }
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(steps, steps);
  for (int j = 0; j < steps; ++j) {
    t(j, j) = alpha[j];
    if (j + 1 < steps) t(j, j + 1) = t(j + 1, j) = beta[j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(t, Eigen::EigenvaluesOnly);
  const double top = solver.eigenvalues()(steps - 1);
  // Adjacency eigenvalue lambda maps to 1/2 + lambda/(2d) for the lazy walk.
  return 0.5 * (1.0 - top / d);
}

double spectral_gap(const Graph& g, int dense_limit) {
  if (g.n_vertices() <= dense_limit) {
    std::vector<std::vector<int>> adjacency(g.n_vertices());
    for (int x = 0; x < g.n_vertices(); ++x) {
      auto nb = g.neighbors(x);
      adjacency[x].assign(nb.begin(), nb.end());
    }
    return spectral_gap_dense(adjacency);
  }
  return spectral_gap_lanczos(g);
}

std::vector<double> treelike_profile(const Graph& g, int r_max) {
  std::vector<double> out(r_max + 1, 0.0);
  for (int r = 0; r <= r_max; ++r) {
    std::int64_t count = 0;
    for (int x = 0; x < g.n_vertices(); ++x) count += is_treelike(g, x, r) ? 1 : 0;
    out[r] = static_cast<double>(count) / g.n_vertices();
  }
  return out;
}

double min_expansion_sampled(const Graph& g, int samples, std::uint64_t seed) {
  const int n = g.n_vertices();
  Engine engine = make_engine(seed, Stream::subsets);
  boost::random::uniform_int_distribution<int> vertex(0, n - 1);
  boost::random::uniform_int_distribution<int> size(1, std::max(1, n / 2));
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> order(n);
  for (int s = 0; s < samples; ++s) {
    const int target = size(engine);
    std::vector<int> set;
    if (s % 2 == 0) {
      // Connected set grown by BFS from a random vertex.
      const Ball b = ball(g, vertex(engine), n);
      set.assign(b.vertices.begin(), b.vertices.begin() + std::min<std::size_t>(target, b.vertices.size()));
    } else {
      std::iota(order.begin(), order.end(), 0);
      for (int i = 0; i < target; ++i) {
        boost::random::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(order[i], order[pick(engine)]);
      }
      set.assign(order.begin(), order.begin() + target);
    }
    const auto boundary = vertex_boundary(g, set);
    best = std::min(best, static_cast<double>(boundary.size()) / set.size());
  }
  return best;
}

AssumptionReport assumption_report(const Graph& g, double alpha, int subset_samples,
                                   std::uint64_t seed) {
  AssumptionReport report;
  report.alpha = alpha;
  const int n = g.n_vertices();
  const int d = g.degree();
  report.alpha_radius =
      static_cast<int>(std::floor(alpha * std::log(static_cast<double>(n)) / std::log(d - 1.0)));
  std::int64_t strict = 0;
  std::int64_t relaxed = 0;
  for (int x = 0; x < n; ++x) {
    const auto rank = ball_cycle_rank(g, x, report.alpha_radius);
    strict += rank == 0 ? 1 : 0;
    relaxed += rank <= 1 ? 1 : 0;
  }
  report.treelike_fraction = static_cast<double>(strict) / n;
  report.one_cycle_fraction = static_cast<double>(relaxed) / n;
  report.spectral_gap = spectral_gap(g);
  report.min_expansion_sampled = min_expansion_sampled(g, subset_samples, seed);
  return report;
}

}  // namespace gffperc
