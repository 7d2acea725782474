#include <cmath>
#include <set>

#include "doctest.h"
#include "gffperc/errors.hpp"
#include "gffperc/stats.hpp"
#include "gffperc/tree_gff.hpp"

using namespace gffperc;

namespace {

int tree_distance(const TreeSample& ts, int x, int y) {
  int dist = 0;
  int lx = ts.level_of(x), ly = ts.level_of(y);
  while (lx > ly) x = ts.parent[x], --lx, ++dist;
  while (ly > lx) y = ts.parent[y], --ly, ++dist;
  while (x != y) x = ts.parent[x], y = ts.parent[y], dist += 2;
  return dist;
}

// Plain level-set component by BFS over all tree edges, restricted to levels < depth.
std::set<int> level_component(const TreeSample& ts, double h) {
  std::set<int> out;
  if (ts.phi[0] < h) return out;
  std::vector<int> stack{0};
  out.insert(0);
  while (!stack.empty()) {
    int x = stack.back();
    stack.pop_back();
    for (int j = 0; j < ts.n_children(x); ++j) {
      int c = ts.first_child[x] + j;
      if (ts.level_of(c) < ts.depth && ts.phi[c] >= h && out.insert(c).second) stack.push_back(c);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("tree layout") {
  TreeSample ts = sample_tree(3, 4, 1);
  CHECK(ts.size() == 1 + 3 + 6 + 12 + 24);
  CHECK(ts.n_children(0) == 3);
  for (int x = 1; x < ts.level_start[4]; ++x) {
    CHECK(ts.n_children(x) == 2);
    CHECK(ts.phi[x] == doctest::Approx(ts.phi[ts.parent[x]] / 2 + ts.y[x]));
  }
  CHECK(ts.phi[0] == ts.y[0]);
  for (int x = ts.level_start[4]; x < ts.size(); ++x) CHECK(ts.n_children(x) == 0);
  CHECK(sample_tree(3, 4, 1).phi == ts.phi);
}

TEST_CASE("tree covariance matches tree Green function") {
  const int reps = 20000, depth = 4;
  TreeSample shape = sample_tree(3, depth, 0);
  // Probe vertices: root, a child, a grandchild in the same branch, and one in another branch.
  std::vector<int> probe{0, 1, shape.first_child[1], shape.first_child[shape.first_child[1]], 2,
                         shape.first_child[3], static_cast<int>(shape.size() - 1)};
  CovarianceAccumulator acc(static_cast<int>(probe.size()));
  std::vector<double> v(probe.size());
  for (int r = 0; r < reps; ++r) {
    TreeSample ts = sample_tree(3, depth, 11, r);
    for (std::size_t i = 0; i < probe.size(); ++i) v[i] = ts.phi[probe[i]];
    acc.add(v);
  }
  auto cov = acc.covariance();
  for (std::size_t i = 0; i < probe.size(); ++i)
    for (std::size_t j = 0; j < probe.size(); ++j) {
      double exact = tree_green(3, tree_distance(shape, probe[i], probe[j]));
      double sd = std::sqrt((tree_variance(3) * tree_variance(3) + exact * exact) / reps);
      CHECK(std::abs(cov(i, j) - exact) < 3 * sd + 1e-12);
    }
  CHECK(std::abs(cov(0, 0) - 2.0) < 0.06);
  CHECK(std::abs(cov(0, 1) - 1.0) < 0.06);
}

TEST_CASE("robust component reductions") {
  TreeSample ts = sample_tree(3, 8, 4);
  SUBCASE("p = 1, gamma = -inf gives the level-set component") {
    for (double h : {-1.0, 0.0, 0.5}) {
      auto c = robust_component(ts, h, 1.0, kNegInf, 1);
      std::set<int> got(c.vertices.begin(), c.vertices.end());
      CHECK(got == level_component(ts, h));
    }
  }
  SUBCASE("p = 0 and huge h give empty components") {
    CHECK(robust_component(ts, -5.0, 0.0, kNegInf, 1).vertices.empty());
    CHECK(robust_component(ts, 1e6, 1.0, kNegInf, 1).vertices.empty());
  }
  SUBCASE("nesting on shared randomness") {
    for (int r = 0; r < 50; ++r) {
      TreeSample s = sample_tree(3, 8, 5, r);
      auto small = robust_component(s, 0.3, 0.8, -1.0, r);
      auto big = robust_component(s, 0.1, 0.9, -3.0, r);
      std::set<int> b(big.vertices.begin(), big.vertices.end());
      for (int x : small.vertices) CHECK(b.count(x) == 1);
    }
  }
  SUBCASE("level counts") {
    auto c = robust_component(ts, -1.0, 1.0, kNegInf, 1);
    CHECK(c.level_counts.size() == 8);
    std::int64_t total = 0;
    for (auto k : c.level_counts) total += k;
    CHECK(total == static_cast<std::int64_t>(c.vertices.size()));
  }
}

TEST_CASE("pruned field conditional law") {
  const double t = 0.3;
  const int reps = 40000;
  std::vector<double> lap(reps), phi2(reps), psi(reps), phi(reps), phi_child(reps), psi_child(reps);
  for (int r = 0; r < reps; ++r) {
    TreeSample ts = sample_tree(3, 3, 21, r);
    prune_field(ts, t, 22, r);
    double nb = 0;
    for (int j = 0; j < 3; ++j) nb += ts.phi[ts.first_child[0] + j];
    lap[r] = ts.phi[0] - nb / 3;
    phi2[r] = ts.phi2[0];
    psi[r] = phi2[r] - t * t / 2 * lap[r];
    phi[r] = ts.phi[0];
    phi_child[r] = ts.phi[1];
    // psi at child 1
    double nb1 = ts.phi[0];
    for (int j = 0; j < 2; ++j) nb1 += ts.phi[ts.first_child[1] + j];
    psi_child[r] = ts.phi2[1] - t * t / 2 * (ts.phi[1] - nb1 / 3);
  }
  auto fit = least_squares(lap, phi2);
  CHECK(fit.slope == doctest::Approx(t * t / 2).epsilon(0.03));
  CHECK(sample_variance(psi) == doctest::Approx(t * t / 2 - std::pow(t, 4) / 4).epsilon(0.03));
  CHECK(std::abs(correlation(psi, phi)) < 3 / std::sqrt(reps));
  CHECK(std::abs(correlation(psi, phi_child)) < 3 / std::sqrt(reps));
  // Cov(psi(o), psi(child)) = t^4/(4d).
  double m0 = sample_mean(psi), m1 = sample_mean(psi_child), c = 0;
  for (int r = 0; r < reps; ++r) c += (psi[r] - m0) * (psi_child[r] - m1);
  c /= reps - 1;
  CHECK(std::abs(c - std::pow(t, 4) / 12) < 3 * 0.045 / std::sqrt(reps));
}

TEST_CASE("prune edge cases") {
  TreeSample ts = sample_tree(3, 5, 1);
  prune_field(ts, 0.0, 1);
  CHECK(ts.pruned_depth == 4);
  for (std::size_t x = 0; x < ts.phi1.size(); ++x) CHECK(ts.phi1[x] == ts.phi[x]);
  CHECK_THROWS_AS(prune_field(ts, 0.9, 1), InvalidArgument);
  TreeSample fresh = sample_tree(3, 5, 1);
  CHECK_THROWS_AS(pruned_component(fresh, 0.0, 1.0, 1), InvalidArgument);
  // t = 0, p = 1: pruned component equals the level-set component.
  auto a = pruned_component(ts, 0.0, 1.0, 3);
  std::set<int> got(a.vertices.begin(), a.vertices.end());
  CHECK(got == level_component(ts, 0.0));
  // Pruned component is contained in the robust component with gamma = -inf.
  TreeSample s = sample_tree(3, 7, 2);
  prune_field(s, 0.4, 3);
  auto pr = pruned_component(s, 0.0, 0.9, 4);
  auto rb = robust_component(s, 0.0, 0.9, kNegInf, 4);
  std::set<int> b(rb.vertices.begin(), rb.vertices.end());
  for (int x : pr.vertices) CHECK(b.count(x) == 1);
}

TEST_CASE("eta estimation") {
  SUBCASE("exploration agrees with the full tree in law") {
    // Survival to depth 6 at h = 0 with full trees versus the branching exploration.
    const int reps = 20000;
    long full = 0;
    for (int r = 0; r < reps; ++r) {
      TreeSample ts = sample_tree(3, 7, 31, r);
      full += robust_component(ts, 0.0, 0.9, -1.0, 1000 + r).level_counts[6] > 0;
    }
    EtaEstimate e = estimate_eta(3, 0.0, 0.9, -1.0, 7, reps, 32);
    double pf = static_cast<double>(full) / reps;
    CHECK(std::abs(pf - e.survival_fraction) < 3 * std::sqrt(2 * pf * (1 - pf) / reps));
  }
  SUBCASE("h = -inf, p = 1 survives always") {
    EtaEstimate e = estimate_eta(3, kNegInf, 1.0, kNegInf, 6, 20, 1);
    CHECK(e.survival_fraction == 1.0);
    CHECK(e.mean_front[5] == 3 * 16);
  }
  SUBCASE("h = 0 is stable across depth, high h dies") {
    EtaEstimate a = estimate_eta(3, 0.0, 1.0, kNegInf, 10, 4000, 5);
    EtaEstimate b = estimate_eta(3, 0.0, 1.0, kNegInf, 15, 4000, 5);
    CHECK(a.survival_fraction > 0.2);
    CHECK(std::abs(a.survival_fraction - b.survival_fraction) < 0.05);
    EtaEstimate c10 = estimate_eta(3, 2.5, 1.0, kNegInf, 10, 4000, 6);
    EtaEstimate c20 = estimate_eta(3, 2.5, 1.0, kNegInf, 20, 4000, 6);
    CHECK(c20.survival_fraction <= c10.survival_fraction);
    CHECK(c20.survival_fraction < 0.01);
  }
  SUBCASE("monotone in parameters") {
    EtaEstimate lo = estimate_eta(3, 0.3, 0.9, -1.0, 12, 4000, 8);
    EtaEstimate hi = estimate_eta(3, 0.1, 0.95, -2.0, 12, 4000, 8);
    CHECK(hi.survival_fraction >= lo.survival_fraction - 2 * lo.ci_halfwidth);
  }
  SUBCASE("thread invariance") {
    EtaEstimate a = estimate_eta(3, 0.0, 1.0, kNegInf, 8, 300, 9, 1, true);
    EtaEstimate b = estimate_eta(3, 0.0, 1.0, kNegInf, 8, 300, 9, 3, true);
    CHECK(a.fronts == b.fronts);
  }
  CHECK_THROWS_AS(estimate_eta(3, 0, 1, kNegInf, 4, 10, 1), InvalidArgument);
}
