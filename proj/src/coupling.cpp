#include "gffperc/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>

#include "gffperc/errors.hpp"
#include "gffperc/rng.hpp"
#include "gffperc/sampler.hpp"

namespace gffperc {

int TreeBall::prefix(int r) const {
  return static_cast<int>(std::upper_bound(level.begin(), level.end(), r) - level.begin());
}

TreeBall tree_ball(const Graph& g, int x, int radius) {
  if (!is_treelike(g, x, radius))
    throw InvalidArgument("vertex " + std::to_string(x) + " is not " + std::to_string(radius) +
                          "-treelike");
  TreeBall tb;
  tb.radius = radius;
  tb.rho.assign(g.n_vertices(), -1);
  tb.graph_id.push_back(x);
  tb.parent.push_back(-1);
  tb.level.push_back(0);
  tb.edge_id.push_back(-1);
  tb.rho[x] = 0;
  for (int u = 0; u < tb.size(); ++u) {
    tb.children.emplace_back();
    if (tb.level[u] == radius) continue;
    const int gx = tb.graph_id[u];
    auto nb = g.neighbors(gx);
    auto inc = g.incident_edges(gx);
    for (std::size_t j = 0; j < nb.size(); ++j) {
      if (tb.parent[u] >= 0 && nb[j] == tb.graph_id[tb.parent[u]]) continue;
      const int c = tb.size();
      tb.graph_id.push_back(nb[j]);
      tb.parent.push_back(u);
      tb.level.push_back(tb.level[u] + 1);
      tb.edge_id.push_back(inc[j]);
      tb.rho[nb[j]] = c;
      tb.children[u].push_back(c);
    }
  }
  return tb;
}

std::vector<std::vector<double>> tree_lazy_kernel(int d, int k_max, int m_max) {
  // Distance chain: from 0 up w.p. 1/2; from m >= 1 up (d-1)/(2d), down 1/(2d); stay 1/2.
  const int width = k_max + 1;
  std::vector<double> dist(width + 1, 0.0), next(width + 1);
  dist[0] = 1.0;
  std::vector<std::vector<double>> out(k_max + 1, std::vector<double>(m_max + 1, 0.0));
  auto record = [&](int k) {
    for (int m = 0; m <= m_max && m <= width; ++m) {
      const double sphere = (m == 0) ? 1.0 : d * std::pow(d - 1.0, m - 1);
      out[k][m] = dist[m] / sphere;
    }
  };
  record(0);
  const double up = (d - 1.0) / (2.0 * d), down = 1.0 / (2.0 * d);
  for (int k = 1; k <= k_max; ++k) {
    std::fill(next.begin(), next.end(), 0.0);
    next[0] += 0.5 * dist[0];
    next[1] += 0.5 * dist[0];
    for (int m = 1; m < width; ++m) {
      next[m] += 0.5 * dist[m];
      next[m + 1] += up * dist[m];
      next[m - 1] += down * dist[m];
    }
    dist.swap(next);
    record(k);
  }
  return out;
}

std::vector<double> tree_tail_profile(int d, int k_lo, int k_hi, int m_max) {
  auto kern = tree_lazy_kernel(d, k_hi, m_max);
  std::vector<double> out(m_max + 1, 0.0);
  for (int k = k_lo + 1; k <= k_hi; ++k)
    for (int m = 0; m <= m_max; ++m) out[m] += 0.5 * kern[k][m];
  return out;
}

namespace {

int tree_distance(const TreeBall& tb, int u, int v) {
  int dist = 0;
  while (tb.level[u] > tb.level[v]) u = tb.parent[u], ++dist;
  while (tb.level[v] > tb.level[u]) v = tb.parent[v], ++dist;
  while (u != v) u = tb.parent[u], v = tb.parent[v], dist += 2;
  return dist;
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw NumericalError("tail covariance eigendecomposition failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double top = std::max(ev.maxCoeff(), 0.0);
  if (ev.minCoeff() < -1e-9 * std::max(top, 1.0))
    throw NumericalError("tail covariance not positive semidefinite");
  Eigen::VectorXd s = ev.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * s.asDiagonal();
}

// sum_{k_lo < k <= k_hi} (1/2)(P^k(s, t) - 1/N) for s, t in `support`.
Eigen::MatrixXd graph_tail_covariance(const Graph& g, const std::vector<int>& support, int k_lo,
                                      int k_hi) {
  const int n = g.n_vertices(), m = static_cast<int>(support.size()), d = g.degree();
  // Row-major N x m block of walk distributions, one column per source.
  std::vector<double> cur(static_cast<std::size_t>(n) * m, 0.0), nxt(cur.size());
  for (int j = 0; j < m; ++j) cur[static_cast<std::size_t>(support[j]) * m + j] = 1.0;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
  const double w = 0.5 / d, inv_n = 1.0 / n;
  for (int k = 1; k <= k_hi; ++k) {
    for (int x = 0; x < n; ++x) {
      double* out = nxt.data() + static_cast<std::size_t>(x) * m;
      const double* self = cur.data() + static_cast<std::size_t>(x) * m;
      for (int j = 0; j < m; ++j) out[j] = 0.5 * self[j];
      for (int y : g.neighbors(x)) {
        const double* in = cur.data() + static_cast<std::size_t>(y) * m;
        for (int j = 0; j < m; ++j) out[j] += w * in[j];
      }
    }
    cur.swap(nxt);
    if (k > k_lo)
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          acc(i, j) += 0.5 * (cur[static_cast<std::size_t>(support[i]) * m + j] - inv_n);
  }
  return 0.5 * (acc + acc.transpose());
}

void center(std::vector<double>& v, int n, double& mean) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += v[i];
  mean = s / n;
}

// Horner over explicit layers on the tree ball's midpoint graph.
// Tree G~ vertices: originals 0..T-1, midpoint of edge (parent(c), c) at T + c - 1.
std::vector<double> tree_explicit(const TreeBall& tb, const Graph& g,
                                  const std::vector<std::vector<double>>& layers, int top,
                                  long& shared, bool& exact) {
  const int t = tb.size(), n = g.n_vertices(), d = g.degree();
  const int total = 2 * t - 1;
  std::vector<double> w(total, 0.0), z(total), q(total);
  const double inv_d = 1.0 / d;
  for (int k = top; k >= 0; --k) {
    const auto& zk = layers[k];
    for (int u = 0; u < t; ++u) z[u] = zk[tb.graph_id[u]];
    for (int c = 1; c < t; ++c) z[t + c - 1] = zk[n + tb.edge_id[c]];
    for (int u = 0; u < t; ++u)
      exact = exact && std::memcmp(&z[u], &zk[tb.graph_id[u]], sizeof(double)) == 0;
    for (int c = 1; c < t; ++c)
      exact = exact && std::memcmp(&z[t + c - 1], &zk[n + tb.edge_id[c]], sizeof(double)) == 0;
    shared += total;
    if (k == top) {
      w = z;
      continue;
    }
    for (int u = 0; u < t; ++u) {
      double s = (u > 0) ? w[t + u - 1] : 0.0;
      for (int c : tb.children[u]) s += w[t + c - 1];
      q[u] = s * inv_d;
    }
    for (int c = 1; c < t; ++c) q[t + c - 1] = 0.5 * (w[c] + w[tb.parent[c]]);
    for (int i = 0; i < total; ++i) w[i] = q[i] + z[i];
  }
  w.resize(t);
  return w;
}

}  // namespace

std::optional<std::pair<int, int>> find_coupling_pair(const Graph& g, int r) {
  const int n = g.n_vertices();
  std::vector<char> tl(n, 0);
  for (int v = 0; v < n; ++v) tl[v] = is_treelike(g, v, 2 * r);
  for (int a = 0; a < n; ++a) {
    if (!tl[a]) continue;
    auto dist = bfs_distances(g, a);
    for (int b = a + 1; b < n; ++b)
      if (tl[b] && dist[b] > 4 * r) return std::make_pair(a, b);
  }
  return std::nullopt;
}

CouplingPlan plan_coupling(const Graph& g, int x, int xp, int r, int k_max, CouplingMode mode) {
  if (r < 0) throw InvalidArgument("r must be nonnegative");
  if (k_max < 2 * r) throw InvalidArgument("k_max must be at least 2r");
  const int n = g.n_vertices();
  if (x < 0 || x >= n || xp < 0 || xp >= n) throw InvalidArgument("vertex out of range");
  if (bfs_distances(g, x)[xp] <= 4 * r)
    throw InvalidArgument("balls B(x,2r) and B(x',2r) overlap");
  CouplingPlan plan;
  plan.g = &g;
  plan.x = x;
  plan.xp = xp;
  plan.r = r;
  plan.k_max = k_max;
  plan.mode = mode;
  plan.ball_x = tree_ball(g, x, 2 * r);
  plan.ball_xp = tree_ball(g, xp, 2 * r);
  const int nr = plan.ball_x.prefix(r);
  for (int u = 0; u < nr; ++u) plan.support.push_back(plan.ball_x.graph_id[u]);
  for (int u = 0; u < nr; ++u) plan.support.push_back(plan.ball_xp.graph_id[u]);

  auto profile = tree_tail_profile(g.degree(), 2 * r, k_max, 2 * r);
  plan.tree_tail_cov.resize(nr, nr);
  for (int u = 0; u < nr; ++u)
    for (int v = 0; v < nr; ++v) plan.tree_tail_cov(u, v) = profile[tree_distance(plan.ball_x, u, v)];
  plan.tree_tail_factor = psd_factor(plan.tree_tail_cov);
  if (mode == CouplingMode::local) {
    plan.graph_tail_cov = graph_tail_covariance(g, plan.support, 2 * r, k_max);
    plan.graph_tail_factor = psd_factor(plan.graph_tail_cov);
  }
  return plan;
}

CoupledSample build_coupled(const CouplingPlan& plan, std::uint64_t seed, std::uint64_t replica) {
  const Graph& g = *plan.g;
  const MidpointGraph mg(g);
  const int n = g.n_vertices(), top = 2 * plan.r;
  const std::size_t m = mg.n_total();
  const int ns = static_cast<int>(plan.support.size());

  CoupledSample cs;
  cs.r = plan.r;
  cs.support = plan.support;
  cs.n_x = ns / 2;
  cs.psi.assign(ns, 0.0);
  cs.graph_tail.assign(ns, 0.0);
  cs.pi_terms.assign(ns, 0.0);

  std::vector<std::vector<double>> layers(top + 1);
  std::vector<double> direct_psi;
  if (plan.mode == CouplingMode::full) {
    auto [field, zl] = sample_decomposition(mg, plan.k_max, seed, replica, true);
    direct_psi = std::move(field.values);
    for (int k = 0; k <= top; ++k) layers[k] = zl.layers[k];
    // Tail sum_{k>2r} Q^k Z_k = Q^{2r+1} (sum_{k>2r} Q^{k-2r-1} Z_k).
    std::vector<double> u(m, 0.0), q(m);
    for (int k = plan.k_max; k > top; --k) {
      if (k < plan.k_max) {
        mg.apply_walk(u, q);
        for (std::size_t i = 0; i < m; ++i) u[i] = q[i] + zl.layers[k][i];
      } else {
        u = zl.layers[k];
      }
    }
    if (plan.k_max > top) {
      for (int i = 0; i <= top; ++i) {
        mg.apply_walk(u, q);
        u.swap(q);
      }
    }
    double mean = 0.0;
    center(u, n, mean);
    for (int i = 0; i < ns; ++i) cs.graph_tail[i] = u[plan.support[i]] - mean;
  } else {
    NormalSource src(seed, Stream::z_layers, replica);
    const double so = std::sqrt(0.5), sm = std::sqrt(g.degree() / 4.0);
    for (int k = top; k >= 0; --k) {
      layers[k].resize(m);
      for (int v = 0; v < n; ++v) layers[k][v] = so * src();
      for (std::size_t v = n; v < m; ++v) layers[k][v] = sm * src();
    }
    NormalSource tail(seed, Stream::coupling, replica);
    Eigen::VectorXd e(plan.graph_tail_factor.cols());
    for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = tail();
    Eigen::VectorXd gt = plan.graph_tail_factor * e;
    for (int i = 0; i < ns; ++i) cs.graph_tail[i] = gt(i);
  }

  // Explicit layers k <= 2r on all of G~.
  std::vector<double> v = layers[top], q(m);
  for (int k = top - 1; k >= 0; --k) {
    mg.apply_walk(v, q);
    for (std::size_t i = 0; i < m; ++i) v[i] = q[i] + layers[k][i];
  }
  double pi_total = 0.0;
  center(v, n, pi_total);
  for (int i = 0; i < ns; ++i) {
    cs.pi_terms[i] = pi_total;
    cs.psi[i] = v[plan.support[i]] - pi_total + cs.graph_tail[i];
  }
  if (plan.mode == CouplingMode::full)
    for (int i = 0; i < ns; ++i) cs.psi[i] = direct_psi[plan.support[i]];

  // Tree fields on both balls.
  cs.phi.assign(ns, 0.0);
  cs.tree_tail.assign(ns, 0.0);
  cs.sharing_exact = true;
  const TreeBall* balls[2] = {&plan.ball_x, &plan.ball_xp};
  for (int b = 0; b < 2; ++b) {
    // Keyed by the centre so that swapping x and x' swaps the tree fields.
    NormalSource tree_src(seed, Stream::tree,
                          replica * static_cast<std::uint64_t>(n) + balls[b]->graph_id[0]);
    auto expl = tree_explicit(*balls[b], g, layers, top, cs.shared_entries, cs.sharing_exact);
    Eigen::VectorXd e(plan.tree_tail_factor.cols());
    for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = tree_src();
    Eigen::VectorXd tt = plan.tree_tail_factor * e;
    for (int u = 0; u < cs.n_x; ++u) {
      const int i = b * cs.n_x + u;
      cs.tree_tail[i] = tt(u);
      cs.phi[i] = expl[u] + tt(u);
    }
  }
  return cs;
}

std::pair<double, double> measure_D(const CoupledSample& cs) {
  double a = 0.0, b = 0.0;
  for (int i = 0; i < cs.n_x; ++i) a = std::max(a, std::abs(cs.psi[i] - cs.phi[i]));
  for (int i = cs.n_x; i < 2 * cs.n_x; ++i) b = std::max(b, std::abs(cs.psi[i] - cs.phi[i]));
  return {a, b};
}

double identity_error(const CoupledSample& cs) {
  double err = 0.0;
  for (std::size_t i = 0; i < cs.psi.size(); ++i) {
    const double lhs = cs.psi[i] - cs.phi[i];
    const double rhs = cs.graph_tail[i] - cs.pi_terms[i] - cs.tree_tail[i];
    err = std::max(err, std::abs(lhs - rhs));
  }
  return err;
}

}  // namespace gffperc
