#include "gffperc/walk_green.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

#include "gffperc/errors.hpp"

namespace gffperc {

std::vector<double> lazy_step(const Graph& g, std::span<const double> f) {
  if (static_cast<int>(f.size()) != g.n_vertices())
    throw InvalidArgument("lazy_step: field length differs from vertex count");
  const double w = 0.5 / g.degree();
  std::vector<double> out(f.size());
  for (int x = 0; x < g.n_vertices(); ++x) {
    double acc = 0.0;
    for (int y : g.neighbors(x)) acc += f[y];
    out[x] = 0.5 * f[x] + w * acc;
  }
  return out;
}

namespace {

Eigen::MatrixXd lazy_matrix(const Graph& g) {
  const int n = g.n_vertices();
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n) * 0.5;
  const double w = 0.5 / g.degree();
  for (int x = 0; x < n; ++x)
    for (int y : g.neighbors(x)) p(x, y) += w;
  return p;
}

}  // namespace

GreenTable zero_average_green(const Graph& g, int cap) {
  const int n = g.n_vertices();
  if (n > cap)
    throw SizeCapError("dense Green table requested for N=" + std::to_string(n) +
                       " above cap " + std::to_string(cap));
  const double inv_n = 1.0 / n;
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - lazy_matrix(g);
  a.array() += inv_n;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Identity(n, n);
  rhs.array() -= inv_n;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw NumericalError("Green system is singular (disconnected graph?)");
  GreenTable table;
  table.base = &g;
  table.c0 = 0.5 * g.degree();
  table.gbar = llt.solve(rhs) / static_cast<double>(g.degree());
  // Symmetrise away round-off so downstream eigensolvers see an exact symmetric table.
  table.gbar = 0.5 * (table.gbar + table.gbar.transpose()).eval();
  return table;
}

Eigen::MatrixXd green_by_series(const Graph& g, int terms) {
  const int n = g.n_vertices();
  const Eigen::MatrixXd p = lazy_matrix(g);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  const double inv_n = 1.0 / n;
  for (int k = 0; k <= terms; ++k) {
    sum += power;
    sum.array() -= inv_n;
    power = (power * p).eval();
  }
  return sum;
}

Eigen::MatrixXd covariance_table(const GreenTable& table) { return table.c0 * table.gbar; }

void write_covariance_csv(std::ostream& out, const Eigen::MatrixXd& cov) {
  out << "i,j,value\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < cov.rows(); ++i)
    for (Eigen::Index j = 0; j < cov.cols(); ++j) out << i << ',' << j << ',' << cov(i, j) << '\n';
}

GreenDecayFit fit_green_decay(const GreenTable& table) {
  const Graph& g = *table.base;
  const int n = g.n_vertices();
  GreenDecayFit fit;
  std::vector<std::vector<int>> dist(n);
  int diameter = 0;
  for (int x = 0; x < n; ++x) {
    dist[x] = bfs_distances(g, x);
    diameter = std::max(diameter, *std::max_element(dist[x].begin(), dist[x].end()));
  }
  fit.max_by_distance.assign(diameter + 1, -std::numeric_limits<double>::infinity());
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      fit.max_by_distance[dist[x][y]] = std::max(fit.max_by_distance[dist[x][y]], table.gbar(x, y));

  double far = 0.0;
  for (int r = (diameter + 1) / 2; r <= diameter; ++r) far = std::max(far, fit.max_by_distance[r]);
  far = std::max(far, 1e-300);
  fit.epsilon = std::max(0.0, -std::log(far) / std::log(static_cast<double>(n)));
  const double floor = std::pow(static_cast<double>(n), -fit.epsilon);
  for (int r = 0; r <= diameter; ++r) {
    const double excess = fit.max_by_distance[r] - floor;
    if (excess > 0) fit.c = std::max(fit.c, excess * std::pow(g.degree() - 1.0, r));
  }
  return fit;
}

std::vector<double> lazy_return_probabilities(const Graph& g, int x, int k_max) {
  std::vector<double> f(g.n_vertices(), 0.0);
  f[x] = 1.0;
  std::vector<double> out{1.0};
  for (int k = 1; k <= k_max; ++k) {
    f = lazy_step(g, f);
    out.push_back(f[x]);
  }
  return out;
}

}  // namespace gffperc
