#include "gffperc/tree_gff.hpp"

#include <algorithm>
#include <cmath>

#include "gffperc/errors.hpp"
#include "gffperc/parallel.hpp"
#include "gffperc/rng.hpp"

namespace gffperc {

double tree_green(int d, int distance) {
  return tree_variance(d) * std::pow(d - 1.0, -distance);
}

int TreeSample::level_of(int x) const {
  auto it = std::upper_bound(level_start.begin(), level_start.end(), static_cast<std::int64_t>(x));
  return static_cast<int>(it - level_start.begin()) - 1;
}

TreeSample sample_tree(int d, int depth, std::uint64_t seed, std::uint64_t index) {
  if (d < 3) throw InvalidArgument("tree degree must be at least 3");
  if (depth < 0) throw InvalidArgument("depth must be nonnegative");
  TreeSample ts;
  ts.d = d;
  ts.depth = depth;
  ts.seed = seed;
  ts.level_start.push_back(0);
  std::int64_t width = 1;
  for (int k = 0; k <= depth; ++k) {
    ts.level_start.push_back(ts.level_start.back() + width);
    width = (k == 0) ? d : width * (d - 1);
  }
  const std::int64_t n = ts.level_start.back();
  if (n > std::numeric_limits<int>::max()) throw SizeCapError("tree too large");
  ts.parent.assign(n, -1);
  ts.first_child.assign(n, -1);
  ts.phi.resize(n);
  ts.y.resize(n);

  NormalSource src(seed, Stream::tree, index);
  const double inv = 1.0 / (d - 1.0);
  const double sd_child = std::sqrt(d / (d - 1.0));
  ts.y[0] = src(std::sqrt(tree_variance(d)));
  ts.phi[0] = ts.y[0];
  for (int k = 0; k < depth; ++k) {
    std::int64_t next = ts.level_start[k + 1];
    for (std::int64_t x = ts.level_start[k]; x < ts.level_start[k + 1]; ++x) {
      const int c = (x == 0) ? d : d - 1;
      ts.first_child[x] = static_cast<int>(next);
      for (int j = 0; j < c; ++j, ++next) {
        ts.parent[next] = static_cast<int>(x);
        ts.y[next] = src(sd_child);
        ts.phi[next] = ts.phi[x] * inv + ts.y[next];
      }
    }
  }
  return ts;
}

std::vector<double> tree_marks(const TreeSample& ts, std::uint64_t seed_iota) {
  Engine eng = make_engine(seed_iota, Stream::marks);
  boost::random::uniform_01<double> u;
  std::vector<double> m(ts.size());
  for (double& v : m) v = u(eng);
  return m;
}

namespace {

double children_sum(const TreeSample& ts, int x) {
  double s = 0.0;
  for (int j = 0; j < ts.n_children(x); ++j) s += ts.phi[ts.first_child[x] + j];
  return s;
}

template <class Pred>
TreeComponent root_component(const TreeSample& ts, int max_level, Pred in_set) {
  TreeComponent c;
  c.level_counts.assign(max_level + 1, 0);
  if (max_level < 0 || !in_set(0)) return c;
  std::vector<int> front{0}, next;
  for (int k = 0; k <= max_level; ++k) {
    c.level_counts[k] = static_cast<std::int64_t>(front.size());
    c.vertices.insert(c.vertices.end(), front.begin(), front.end());
    if (k == max_level) break;
    next.clear();
    for (int x : front)
      for (int j = 0; j < ts.n_children(x); ++j) {
        int ch = ts.first_child[x] + j;
        if (in_set(ch)) next.push_back(ch);
      }
    front.swap(next);
    if (front.empty()) break;
  }
  return c;
}

}  // namespace

TreeComponent robust_component(const TreeSample& ts, double h, std::span<const double> marks,
                               double p, double gamma) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("p must lie in [0, 1]");
  const bool check_children = !(std::isinf(gamma) && gamma < 0);
  return root_component(ts, ts.depth - 1, [&](int x) {
    if (!(ts.phi[x] >= h) || !(marks[x] <= p) || p == 0.0) return false;
    return !check_children || children_sum(ts, x) >= gamma;
  });
}

TreeComponent robust_component(const TreeSample& ts, double h, double p, double gamma,
                               std::uint64_t seed_iota) {
  auto marks = tree_marks(ts, seed_iota);
  return robust_component(ts, h, marks, p, gamma);
}

void prune_field(TreeSample& ts, double t, std::uint64_t seed, std::uint64_t index) {
  if (!(t >= 0.0 && t <= kPruneTMax))
    throw InvalidArgument("t outside [0, " + std::to_string(kPruneTMax) + "]");
  if (ts.depth < 1) throw InvalidArgument("prune_field needs one level of margin below the reported depth");
  const int d = ts.d;
  const std::int64_t n_rep = ts.level_start[ts.depth];  // vertices on levels <= depth-1
  const double t2 = t * t, t4 = t2 * t2;
  const double u = std::sqrt(t2 / 2 - t4 / 2);
  const double v = std::sqrt(t4 / (4.0 * d));
  NormalSource src(seed, Stream::prune, index);
  // eta_e indexed by the child endpoint of e; needed for every edge touching
  // a reported vertex, i.e. for children up to level depth.
  const std::int64_t n_edge = ts.level_start[ts.depth + 1];
  std::vector<double> eta(n_edge, 0.0);
  for (std::int64_t c = 1; c < n_edge; ++c) eta[c] = src();
  ts.phi1.assign(n_rep, 0.0);
  ts.phi2.assign(n_rep, 0.0);
  for (std::int64_t x = 0; x < n_rep; ++x) {
    double nb = 0.0, edge_noise = 0.0;
    if (ts.parent[x] >= 0) {
      nb += ts.phi[ts.parent[x]];
      edge_noise += eta[x];
    }
    for (int j = 0; j < ts.n_children(static_cast<int>(x)); ++j) {
      const int c = ts.first_child[x] + j;
      nb += ts.phi[c];
      edge_noise += eta[c];
    }
    const double mean = 0.5 * t2 * (ts.phi[x] - nb / d);
    ts.phi2[x] = mean + u * src() + v * edge_noise;
    ts.phi1[x] = ts.phi[x] - ts.phi2[x];
  }
  ts.pruned_depth = ts.depth - 1;
}

TreeComponent pruned_component(const TreeSample& ts, double h, double p, std::uint64_t seed_iota) {
  if (ts.pruned_depth < 0) throw InvalidArgument("pruned values missing; call prune_field first");
  auto marks = tree_marks(ts, seed_iota);
  return root_component(ts, ts.pruned_depth, [&](int x) {
    return ts.phi[x] >= h && ts.phi1[x] >= h && marks[x] <= p && p > 0.0;
  });
}

std::vector<std::int64_t> explore_robust(int d, double h, double p, double gamma, int depth,
                                         std::uint64_t seed, std::uint64_t index) {
  NormalSource src(seed, Stream::tree, index);
  const double inv = 1.0 / (d - 1.0);
  const double sd_child = std::sqrt(d / (d - 1.0));
  const bool check_children = !(std::isinf(gamma) && gamma < 0);
  std::vector<std::int64_t> fronts(depth, 0);

  // pending: values of candidate vertices at the current level whose robustness
  // is still undecided. Deciding it generates their children.
  std::vector<double> pending{src(std::sqrt(tree_variance(d)))}, next, kids;
  bool root = true;
  for (int k = 0; k < depth && !pending.empty(); ++k) {
    next.clear();
    std::int64_t robust = 0;
    for (double a : pending) {
      if (!(a >= h)) continue;
      if (!(src.uniform() <= p) || p == 0.0) continue;
      const int c = root ? d : d - 1;
      kids.resize(c);
      double s = 0.0;
      for (int j = 0; j < c; ++j) {
        kids[j] = a * inv + src(sd_child);
        s += kids[j];
      }
      if (check_children && !(s >= gamma)) continue;
      ++robust;
      next.insert(next.end(), kids.begin(), kids.end());
    }
    root = false;
    fronts[k] = robust;
    if (robust == 0) break;
    pending.swap(next);
  }
  return fronts;
}

EtaEstimate estimate_eta(int d, double h, double p, double gamma, int depth, long replicas,
                         std::uint64_t seed, int threads, bool keep_fronts) {
  if (d < 3) throw InvalidArgument("tree degree must be at least 3");
  if (depth < 5) throw InvalidArgument("estimate_eta needs depth >= 5");
  if (replicas < 1) throw InvalidArgument("replicas must be positive");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("p must lie in [0, 1]");
  std::vector<std::vector<std::int64_t>> fronts(replicas);
  parallel_replicas(replicas, threads, [&](long r, int) {
    fronts[r] = explore_robust(d, h, p, gamma, depth, seed, static_cast<std::uint64_t>(r));
  });
  EtaEstimate e;
  e.d = d;
  e.h = h;
  e.p = p;
  e.gamma = gamma;
  e.depth = depth;
  e.replicas = replicas;
  e.mean_front.assign(depth, 0.0);
  long survived = 0;
  for (const auto& f : fronts) {
    survived += f[depth - 1] > 0;
    for (int k = 0; k < depth; ++k) e.mean_front[k] += static_cast<double>(f[k]);
  }
  for (double& m : e.mean_front) m /= static_cast<double>(replicas);
  e.survival_fraction = static_cast<double>(survived) / static_cast<double>(replicas);
  e.ci_halfwidth =
      1.96 * std::sqrt(e.survival_fraction * (1 - e.survival_fraction) / static_cast<double>(replicas));
  if (keep_fronts) e.fronts = std::move(fronts);
  return e;
}

}  // namespace gffperc
