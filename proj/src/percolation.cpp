#include "gffperc/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/pending/disjoint_sets.hpp>

#include "gffperc/errors.hpp"
#include "gffperc/operator.hpp"
#include "gffperc/sampler.hpp"
#include "gffperc/spectral.hpp"
#include "json.hpp"

namespace gffperc {

namespace {

constexpr double kZbarSd = 0.70710678118654752440;

void require_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw InvalidArgument(std::string("dimension mismatch: ") + what);
}

}  // namespace

std::vector<char> level_set(std::span<const double> f, double h) {
  std::vector<char> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] >= h ? 1 : 0;
  return out;
}

std::int64_t ComponentStats::set_size() const {
  return std::accumulate(sizes.begin(), sizes.end(), std::int64_t{0});
}

std::int64_t ComponentStats::mesoscopic_count(std::int64_t m) const {
  std::int64_t total = 0;
  for (auto s : sizes) {
    if (s < m) break;
    total += s;
  }
  return total;
}

ComponentStats components(const Graph& g, std::span<const char> mask, double h) {
  const int n = g.n_vertices();
  require_same(mask.size(), static_cast<std::size_t>(n), "mask");
  std::vector<int> rank(n, 0), parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  boost::disjoint_sets<int*, int*> ds(rank.data(), parent.data());
  for (const auto& [u, v] : g.edges())
    if (mask[u] && mask[v]) ds.union_set(u, v);

  // Root -> provisional id in order of smallest vertex.
  std::vector<int> root_id(n, -1), provisional(n, -1);
  std::vector<std::int64_t> size;
  for (int x = 0; x < n; ++x) {
    if (!mask[x]) continue;
    const int r = ds.find_set(x);
    if (root_id[r] < 0) {
      root_id[r] = static_cast<int>(size.size());
      size.push_back(0);
    }
    provisional[x] = root_id[r];
    ++size[root_id[r]];
  }
  std::vector<int> order(size.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return size[a] > size[b]; });
  std::vector<int> relabel(size.size());
  ComponentStats cs;
  cs.h = h;
  cs.sizes.resize(size.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    relabel[order[i]] = static_cast<int>(i);
    cs.sizes[i] = size[order[i]];
  }
  cs.component.assign(n, -1);
  for (int x = 0; x < n; ++x)
    if (provisional[x] >= 0) cs.component[x] = relabel[provisional[x]];
  return cs;
}

ComponentStats level_components(const Graph& g, std::span<const double> f, double h) {
  auto mask = level_set(f, h);
  return components(g, mask, h);
}

double small_component_fraction(const Graph& g, std::span<const double> f, double h, int r) {
  if (r < 2) throw InvalidArgument("r must be at least 2");
  const int n = g.n_vertices();
  const int radius = r / 2;
  auto cs = level_components(g, f, h);
  std::vector<std::vector<int>> members(cs.sizes.size());
  for (int x = 0; x < n; ++x)
    if (cs.component[x] >= 0 && cs.sizes[cs.component[x]] <= tree_ball_size(g.degree(), radius))
      members[cs.component[x]].push_back(x);

  std::int64_t small = n - cs.set_size();
  std::vector<int> stamp(n, -1), frontier, next;
  int mark = 0;
  for (const auto& comp : members) {
    for (int x : comp) {
      ++mark;
      stamp[x] = mark;
      frontier.assign(1, x);
      for (int step = 0; step < radius; ++step) {
        next.clear();
        for (int u : frontier)
          for (int v : g.neighbors(u))
            if (stamp[v] != mark) {
              stamp[v] = mark;
              next.push_back(v);
            }
        frontier.swap(next);
      }
      bool inside = true;
      for (int y : comp) inside = inside && stamp[y] == mark;
      if (inside) ++small;
    }
  }
  return static_cast<double>(small) / n;
}

double l_from_p(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("p out of [0,1]");
  if (p == 1.0) return -std::numeric_limits<double>::infinity();
  if (p == 0.0) return std::numeric_limits<double>::infinity();
  return kZbarSd * boost::math::quantile(boost::math::normal(), 1.0 - p);
}

std::vector<char> mesoscopic_mask(std::span<const double> psi1, std::span<const double> psi,
                                  std::span<const double> zbar, const ReducedGraphParams& rgp,
                                  double h) {
  require_same(psi1.size(), psi.size(), "psi");
  require_same(psi1.size(), zbar.size(), "zbar");
  std::vector<char> mask(psi1.size());
  for (std::size_t i = 0; i < psi1.size(); ++i)
    mask[i] = psi1[i] >= h && psi[i] >= h && zbar[i] >= rgp.L && psi1[i] >= rgp.K;
  return mask;
}

MesoscopicResult mesoscopic_scan(const Graph& g, std::span<const double> psi1,
                                 std::span<const double> psi, std::span<const double> zbar,
                                 const ReducedGraphParams& rgp, double h, double c) {
  require_same(psi1.size(), static_cast<std::size_t>(g.n_vertices()), "graph");
  if (!(c >= 0.0 && c < 1.0)) throw InvalidArgument("exponent c must lie in [0,1)");
  MesoscopicResult res;
  res.threshold = static_cast<std::int64_t>(std::ceil(std::pow(g.n_vertices(), c) - 1e-12));
  auto mask = mesoscopic_mask(psi1, psi, zbar, rgp, h);
  res.stats = components(g, mask, h);
  res.count = res.stats.mesoscopic_count(res.threshold);
  for (auto s : res.stats.sizes)
    if (s >= res.threshold) ++res.n_components;
  return res;
}

TreelikeScale treelike_scale(const Graph& g, double fraction, int r_max) {
  const int n = g.n_vertices();
  TreelikeScale ts;
  std::vector<int> alive(n);
  std::iota(alive.begin(), alive.end(), 0);
  for (int k = 0; k <= 2 * r_max; ++k) {
    std::vector<int> keep;
    for (int x : alive)
      if (is_treelike(g, x, k)) keep.push_back(x);
    alive.swap(keep);
    ts.profile.push_back(static_cast<double>(alive.size()) / n);
    if (ts.profile.back() < fraction) break;
    if (k % 2 == 0) ts.r = k / 2;
  }
  ts.c1 = ts.r / std::log(static_cast<double>(n));
  return ts;
}

double mesoscopic_exponent(double c1, double p, double lambda, double delta_prime) {
  const double arg = p * lambda * (1.0 - 2.0 * delta_prime);
  if (!(arg > 1.0)) throw InvalidArgument("p * lambda * (1 - 2 delta') must exceed 1");
  return c1 * std::log(arg);
}

BadSetCounts bad_set_counts(std::span<const double> psi1, std::span<const double> zbar, double K,
                            double L) {
  require_same(psi1.size(), zbar.size(), "zbar");
  BadSetCounts b;
  for (std::size_t i = 0; i < psi1.size(); ++i) {
    b.b1 += zbar[i] < L;
    b.b2 += psi1[i] < K;
  }
  return b;
}

GiantResult giant_experiment(int n, int d, double h, std::uint64_t seed, int k_max) {
  Graph g = build_random_regular(n, d, seed);
  GiantResult res;
  res.n = n;
  res.d = d;
  res.h = h;
  res.seed = seed;
  res.gap = spectral_gap(g);
  res.k_max = k_max > 0 ? k_max : default_k_max(res.gap);
  MidpointGraph mg(g);
  auto field = sample_decomposition(mg, res.k_max, seed).first;
  auto cs = level_components(g, field.values, h);
  res.level_size = cs.set_size();
  res.c_max = cs.c_max();
  res.c_sec = cs.c_sec();
  return res;
}

SprinkleRecord sprinkling_run(const SprinkleConfig& cfg, std::uint64_t seed) {
  if (!(cfg.h < cfg.h_prime)) throw InvalidArgument("need h < h'");
  if (!(cfg.p > 0.5 && cfg.p <= 1.0)) throw InvalidArgument("p must lie in (1/2, 1]");
  if (!(cfg.eta_ref > 0.0)) throw InvalidArgument("eta_ref must be positive");
  Graph g = build_random_regular(cfg.n, cfg.d, seed);
  const double n = cfg.n;
  SprinkleRecord rec;
  rec.seed = seed;
  rec.n = cfg.n;
  rec.d = cfg.d;
  rec.h = cfg.h;
  rec.h_prime = cfg.h_prime;
  rec.p = cfg.p;
  rec.eta_ref = cfg.eta_ref;
  rec.t = cfg.t.value_or(1.0 / std::log(n));
  rec.L = l_from_p(cfg.p);
  rec.K = std::min(cfg.h, cfg.K0);

  const int k_max = cfg.k_max > 0 ? cfg.k_max : default_k_max(spectral_gap(g));
  MidpointGraph mg(g);
  auto split = sample_split(mg, k_max, rec.t, seed);
  auto zbar = sample_bar_z2(g, seed);

  auto scale = treelike_scale(g, cfg.treelike_fraction);
  rec.c1 = scale.c1;
  const double lambda = cfg.lambda_ref > 0.0 ? cfg.lambda_ref : lambda_h(cfg.d, cfg.h_prime);
  rec.c_hprime = mesoscopic_exponent(rec.c1, cfg.p, lambda, cfg.delta_prime);

  ReducedGraphParams rgp{rec.K, rec.L, cfg.p, rec.t};
  auto meso = mesoscopic_scan(g, split.psi1.values, split.psi.values, zbar, rgp, cfg.h_prime,
                              rec.c_hprime);
  rec.m_n = meso.threshold;
  rec.meso_count = meso.count;
  rec.meso_components = meso.n_components;
  const double a1 = (1.0 - cfg.delta) * cfg.eta_ref, a2 = (1.0 - 2.0 * cfg.delta) * cfg.eta_ref;
  rec.a3 = rec.meso_count >= a1 * n;

  // Fix the largest mesoscopic components until they hold a1 N vertices.
  const auto& sizes = meso.stats.sizes;
  std::int64_t fixed = 0;
  while (fixed < meso.n_components && rec.fixed_mass < a1 * n) rec.fixed_mass += sizes[fixed++];
  rec.fixed_components = fixed;

  auto sprinkle = bar_psi2(zbar, rec.t);
  std::vector<double> psibar(cfg.n);
  for (int x = 0; x < cfg.n; ++x) psibar[x] = split.psi1.values[x] + sprinkle.values[x];
  rec.centering = std::abs(std::accumulate(zbar.begin(), zbar.end(), 0.0) / n);
  rec.centering_ok = rec.centering <= cfg.h_prime - cfg.h;

  auto bar = level_components(g, psibar, cfg.h);
  rec.c_max = bar.c_max();
  rec.c_sec = bar.c_sec();
  rec.contained = true;
  std::vector<char> whole(fixed, 1);
  for (int x = 0; x < cfg.n; ++x) {
    const int c = meso.stats.component[x];
    if (c < 0 || c >= fixed) continue;
    if (psibar[x] < cfg.h) rec.contained = false;
    if (bar.component[x] != 0) whole[c] = 0;
  }
  for (std::int64_t c = 0; c < fixed; ++c)
    if (whole[c]) rec.fixed_in_giant += sizes[c];

  if (rec.t > 0.0) {
    const boost::math::normal zb(0.0, kZbarSd);
    const double lhs = boost::math::cdf(boost::math::complement(zb, (cfg.h + 1.0 - rec.K) / rec.t));
    const double rhs =
        std::pow(n, -rec.c_hprime * cfg.beta_prime * cfg.delta * cfg.eta_ref / 8.0);
    rec.tnfix_ok = lhs >= rhs;
  }
  rec.merged = rec.a3 && rec.c_max >= a2 * n &&
               rec.fixed_in_giant >= rec.fixed_mass - cfg.delta * cfg.eta_ref * n;
  return rec;
}

std::string to_json_line(const SprinkleRecord& rec) {
  nlohmann::ordered_json j;
  j["seed"] = rec.seed;
  j["n"] = rec.n;
  j["d"] = rec.d;
  j["h"] = rec.h;
  j["h_prime"] = rec.h_prime;
  j["p"] = rec.p;
  j["t"] = rec.t;
  j["L"] = rec.L;
  j["K"] = rec.K;
  j["c1"] = rec.c1;
  j["c_hprime"] = rec.c_hprime;
  j["m_n"] = rec.m_n;
  j["c_max"] = rec.c_max;
  j["c_sec"] = rec.c_sec;
  j["meso_count"] = rec.meso_count;
  j["meso_components"] = rec.meso_components;
  j["fixed_components"] = rec.fixed_components;
  j["fixed_mass"] = rec.fixed_mass;
  j["fixed_in_giant"] = rec.fixed_in_giant;
  j["a3"] = rec.a3;
  j["centering"] = rec.centering;
  j["centering_ok"] = rec.centering_ok;
  j["contained"] = rec.contained;
  j["tnfix_ok"] = rec.tnfix_ok;
  j["merged"] = rec.merged;
  j["eta_ref"] = rec.eta_ref;
  return j.dump();
}

}  // namespace gffperc
