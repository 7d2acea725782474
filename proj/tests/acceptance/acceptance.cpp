#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gffperc/coupling.hpp"
#include "gffperc/operator.hpp"
#include "gffperc/percolation.hpp"
#include "gffperc/sampler.hpp"
#include "gffperc/spectral.hpp"
#include "gffperc/stats.hpp"
#include "gffperc/tree_gff.hpp"
#include "gffperc/walk_green.hpp"
#include "json.hpp"

using namespace gffperc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

// ---------------------------------------------------------------- 1
Outcome green_oracle() {
  Graph k4 = complete_graph(4);
  auto table = zero_average_green(k4);
  Eigen::MatrixXd G = table.green(), cov = covariance_table(table);
  // Oracle: sum over non-unit eigenpairs of the lazy walk of v v^T / (1 - lambda).
  Eigen::MatrixXd P = Eigen::MatrixXd::Constant(4, 4, 1.0 / 6.0);
  P.diagonal().setConstant(0.5);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
  Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(4, 4);
  for (int i = 0; i < 4; ++i) {
    const double lam = es.eigenvalues()(i);
    if (std::abs(lam - 1.0) < 1e-12) continue;
    oracle += es.eigenvectors().col(i) * es.eigenvectors().col(i).transpose() / (1.0 - lam);
  }
  double err = 0.0, cov_err = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double want = i == j ? 9.0 / 8.0 : -3.0 / 8.0;
      err = std::max({err, std::abs(G(i, j) - want), std::abs(oracle(i, j) - want)});
      cov_err = std::max(cov_err, std::abs(cov(i, j) - want / 2.0));
    }
  const double rows = G.rowwise().sum().cwiseAbs().maxCoeff();
  return {err < 1e-9 && cov_err < 1e-9 && rows < 1e-9,
          fmt("max|G - (9/8, -3/8)| = %.2e (eigen oracle agrees), covariance err %.2e, "
              "max|row sum| %.2e", err, cov_err, rows)};
}

// ---------------------------------------------------------------- 2
struct CovCheck {
  double max_err = 0.0, max_z = 0.0, max_sum = 0.0;
  int k_max = 0;
};

CovCheck decomposition_check(const Graph& g, long reps, std::uint64_t seed) {
  CovCheck out;
  const int n = g.n_vertices();
  out.k_max = k_max_for_bias(g, 1e-3);
  auto exact = covariance_table(zero_average_green(g));
  MidpointGraph mg(g);
  CovarianceAccumulator acc(n);
  for (long r = 0; r < reps; ++r) {
    auto f = sample_decomposition(mg, out.k_max, seed, r).first;
    acc.add(f.values);
    out.max_sum = std::max(out.max_sum, std::abs(f.sum()));
  }
  Eigen::MatrixXd emp = acc.covariance();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double e = std::abs(emp(i, j) - exact(i, j));
      const double se =
          std::sqrt((exact(i, i) * exact(j, j) + exact(i, j) * exact(i, j)) / reps);
      out.max_err = std::max(out.max_err, e);
      out.max_z = std::max(out.max_z, e / se);
    }
  return out;
}

Outcome decomposition() {
  const long reps = 100000;
  auto a = decomposition_check(complete_graph(4), reps, 1);
  auto b = decomposition_check(build_random_regular(64, 3, 1), reps, 2);
  const bool pass = a.max_err <= 0.01 && b.max_err <= 0.01 && a.max_sum <= 1e-9 * 4 &&
                    b.max_sum <= 1e-9 * 64;
  return {pass, fmt("K4: k_max %d, max err %.4f (max z %.2f), max|sum| %.1e; N=64: k_max %d, "
                    "max err %.4f (max z %.2f over 4096 entries), max|sum| %.1e; tol 0.01",
                    a.k_max, a.max_err, a.max_z, a.max_sum, b.k_max, b.max_err, b.max_z,
                    b.max_sum)};
}

// ---------------------------------------------------------------- 3
Outcome conditional_lemma() {
  const double t = 0.3;
  const long reps = 100000;
  const int d = 3;
  std::vector<double> lap(reps), phi2(reps), psi(reps);
  std::vector<std::vector<double>> phis(3, std::vector<double>(reps));
  for (long r = 0; r < reps; ++r) {
    TreeSample ts = sample_tree(d, 8, 101, r);
    prune_field(ts, t, 102, r);
    double nb = 0.0;
    for (int j = 0; j < d; ++j) nb += ts.phi[ts.first_child[0] + j];
    lap[r] = ts.phi[0] - nb / d;
    phi2[r] = ts.phi2[0];
    psi[r] = phi2[r] - t * t / 2.0 * lap[r];
    phis[0][r] = ts.phi[0];
    phis[1][r] = ts.phi[1];
    phis[2][r] = ts.phi[ts.first_child[1]];
  }
  auto fit = least_squares(lap, phi2);
  const double slope_rel = std::abs(fit.slope / (t * t / 2.0) - 1.0);
  const double var_want = t * t / 2.0 - std::pow(t, 4) / 4.0;
  const double var_rel = std::abs(sample_variance(psi) / var_want - 1.0);
  double corr = 0.0;
  for (const auto& p : phis) corr = std::max(corr, std::abs(correlation(psi, p)));
  const double bound = 3.0 / std::sqrt(static_cast<double>(reps));
  const double slope_se =
      std::sqrt(sample_variance(psi) / (sample_variance(lap) * static_cast<double>(reps)));
  return {slope_rel <= 0.02 && var_rel <= 0.02 && corr <= bound,
          fmt("slope %.5f vs t^2/2 = %.5f (rel %.4f, standard error %.5f); Var psi %.5f vs %.5f (rel %.4f); "
              "max|corr(psi(o), phi)| over o, child, grandchild %.4f <= %.4f",
              fit.slope, t * t / 2.0, slope_rel, slope_se, sample_variance(psi), var_want, var_rel, corr,
              bound)};
}

// ---------------------------------------------------------------- 4
Outcome operator_sanity() {
  const int d = 3;
  const double low = lambda_h(d, -8.0);
  std::vector<double> grid;
  for (double h = -3.0; h <= 3.0 + 1e-9; h += 0.25) grid.push_back(lambda_h(d, h));
  bool decreasing = true;
  for (std::size_t i = 1; i < grid.size(); ++i) decreasing = decreasing && grid[i] < grid[i - 1];
  const double p = 0.9, h = 0.0;
  const std::vector<double> gammas = {-2.0, -5.0, -10.0, -20.0};
  auto limit = lambda_limit_check(d, h, p, gammas);
  const double target = p * lambda_h(d, h);
  const double lim_err = std::abs(limit.back() - target);
  // Kernel: Monte Carlo expectation versus closed-form quadrature for f = 1 and f = y.
  double mc_rel = 0.0;
  for (double gamma : {kNegInf, 0.0}) {
    auto og = build_operator(d, 0.5, p, gamma);
    for (auto f : {std::function<double(double)>([](double) { return 1.0; }),
                   std::function<double(double)>([](double y) { return y; })}) {
      for (double a : {0.5, 1.5}) {
        const double q = apply_at(og, f, a);
        const double mc = apply_monte_carlo(d, 0.5, p, gamma, f, a, 2000000, 7);
        mc_rel = std::max(mc_rel, std::abs(mc / q - 1.0));
      }
    }
  }
  return {std::abs(low - (d - 1)) < 1e-3 && decreasing && lim_err < 1e-3 && mc_rel < 0.01,
          fmt("lambda(-8) = %.7f; strictly decreasing on [-3,3] step 0.25: %s; "
              "lambda^{p,gamma=-20} = %.7f vs p*lambda = %.7f (err %.1e); kernel MC max rel %.4f",
              low, decreasing ? "yes" : "no", limit.back(), target, lim_err, mc_rel)};
}

// ---------------------------------------------------------------- 5
double front_slope(const EtaEstimate& e, int from) {
  std::vector<double> k, y;
  for (int i = from; i < static_cast<int>(e.mean_front.size()); ++i)
    if (e.mean_front[i] > 0) k.push_back(i), y.push_back(std::log(e.mean_front[i]));
  return k.size() < 2 ? -INFINITY : least_squares(k, y).slope;
}

Outcome hstar_consistency() {
  const int d = 3;
  HStarConfig c256, c512;
  c512.n_nodes = 512;
  const double h256 = h_star(d, 1e-7, c256), h512 = h_star(d, 1e-7, c512);
  bool consistent = true;
  std::string detail = fmt("h* = %.6f (256 nodes), %.6f (512 nodes)", h256, h512);
  for (double dh : {-0.2, 0.2}) {
    const double h = h256 + dh;
    const double lam = lambda_h(d, h);
    auto e = estimate_eta(d, h, 1.0, kNegInf, 40, 10000, 55);
    const double slope = front_slope(e, 10);
    consistent = consistent && ((slope > 0) == (lam > 1));
    detail += fmt("; h = %.3f: lambda %.4f, mean-front growth rate exp(%.4f) = %.4f, "
                  "survival to depth 40 %.4f",
                  h, lam, slope, std::exp(slope), e.survival_fraction);
  }
  return {h256 > 0 && std::abs(h256 - h512) < 1e-3 && consistent, detail};
}

// ---------------------------------------------------------------- 6
Outcome coupling() {
  // Non-trivial identity and bit-exact sharing with every layer explicit.
  Graph small = build_random_regular(2000, 3, 1);
  auto sp = find_coupling_pair(small, 2);
  double full_err = 0.0;
  bool shared = sp.has_value();
  if (sp) {
    auto plan = plan_coupling(small, sp->first, sp->second, 2, default_k_max(spectral_gap(small)),
                              CouplingMode::full);
    for (int rep = 0; rep < 20; ++rep) {
      auto cs = build_coupled(plan, 3, rep);
      shared = shared && cs.sharing_exact;
      full_err = std::max(full_err, identity_error(cs));
    }
  }
  // Tail of max(D, D') at N = 1e5, since N = 1e4 has no 8-treelike vertices.
  const int n = 100000, reps = 1000;
  const double eps = 2.0;
  Graph g = build_random_regular(n, 3, 1);
  const int k_max = default_k_max(spectral_gap(g));
  auto pair = find_coupling_pair(g, 4);
  if (!pair) return {false, "no 8-treelike pair at N = 1e5"};
  std::vector<double> tail;
  std::string detail =
      fmt("full mode (N=2000, r=2): sharing exact %s, max identity err %.1e; local mode N=1e5, "
          "k_max %d, eps %.1f:", shared ? "yes" : "no", full_err, k_max, eps);
  double local_err = 0.0;
  for (int r : {2, 3, 4}) {
    auto plan = plan_coupling(g, pair->first, pair->second, r, k_max);
    std::vector<double> m(reps);
    for (int i = 0; i < reps; ++i) {
      auto cs = build_coupled(plan, 11, i);
      shared = shared && cs.sharing_exact;
      local_err = std::max(local_err, identity_error(cs));
      auto [a, b] = measure_D(cs);
      m[i] = std::max(a, b);
    }
    std::vector<double> sorted = m;
    std::sort(sorted.begin(), sorted.end());
    const double frac = static_cast<double>(std::count_if(m.begin(), m.end(),
                                                          [&](double v) { return v > eps; })) /
                        reps;
    const double frac3 = static_cast<double>(std::count_if(m.begin(), m.end(),
                                                           [](double v) { return v > 3.0; })) /
                         reps;
    tail.push_back(frac);
    detail += fmt(" r=%d P(max D > %.1f) = %.3f (eps 3: %.3f, median %.3f, tail variance %.3f)", r,
                  eps, frac, frac3, sorted[reps / 2], plan.graph_tail_cov(0, 0));
  }
  const bool decreasing = tail[1] < tail[0] && tail[2] < tail[1];
  detail += fmt("; local identity err %.1e; tail decreasing in r: %s", local_err,
                decreasing ? "yes" : "no");
  return {shared && full_err <= 1e-9 && local_err <= 1e-9 && decreasing, detail};
}

// ---------------------------------------------------------------- 7
Outcome giant() {
  const int d = 3, n = 20000;
  auto eta = estimate_eta(d, 0.0, 1.0, kNegInf, 20, 100000, 77);
  double mean = 0.0, worst_sec = 0.0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    auto r = giant_experiment(n, d, 0.0, s);
    mean += static_cast<double>(r.c_max) / n / 20.0;
    worst_sec = std::max(worst_sec, static_cast<double>(r.c_sec) / n);
  }
  const bool super = std::abs(mean - eta.survival_fraction) <= 0.1 && worst_sec <= 0.05;

  const double h = h_star(d) + 0.5;
  std::vector<double> logn, logc;
  double worst_frac = 0.0;
  std::string sizes;
  for (int m : {5000, 10000, 20000}) {
    double c = 0.0;
    for (std::uint64_t s = 1; s <= 5; ++s) {
      auto r = giant_experiment(m, d, h, s);
      c += r.c_max / 5.0;
      worst_frac = std::max(worst_frac, static_cast<double>(r.c_max) / m);
    }
    logn.push_back(std::log(m));
    logc.push_back(std::log(c));
    sizes += fmt(" %d:%.1f", m, c);
  }
  const double growth = least_squares(logn, logc).slope;
  const bool sub = worst_frac <= 0.01 && growth < 0.5;
  return {super && sub,
          fmt("h=0: mean c_max/N %.4f vs eta(0) %.4f +- %.4f, max c_sec/N %.4f; h = h*+0.5 = %.3f: "
              "max c_max/N %.4f, mean c_max by N%s, log-log growth exponent %.3f (< 0.5)",
              mean, eta.survival_fraction, eta.ci_halfwidth, worst_sec, h, worst_frac,
              sizes.c_str(), growth)};
}

// ---------------------------------------------------------------- 8
Outcome mesoscopic() {
  const int d = 3, n = 20000;
  const double h = 0.0, p = 0.95, t = 0.1;
  auto eta = estimate_eta(d, h, p, kNegInf, 20, 100000, 88);
  const double lambda = lambda_h(d, h);
  ReducedGraphParams rgp{-INFINITY, l_from_p(p), p, t};
  int good = 0;
  double lo = 1.0, c_used = 0.0, c1_used = 0.0;
  std::int64_t threshold = 0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    Graph g = build_random_regular(n, d, s);
    MidpointGraph mg(g);
    auto split = sample_split(mg, default_k_max(spectral_gap(g)), t, s);
    auto zbar = sample_bar_z2(g, s);
    auto scale = treelike_scale(g, 0.9);
    const double c = mesoscopic_exponent(scale.c1, p, lambda, 0.05);
    auto m = mesoscopic_scan(g, split.psi1.values, split.psi.values, zbar, rgp, h, c);
    const double frac = static_cast<double>(m.count) / n;
    lo = std::min(lo, frac);
    good += frac >= 0.8 * eta.survival_fraction;
    c_used = c;
    c1_used = scale.c1;
    threshold = m.threshold;
  }
  return {good >= 16,
          fmt("c1 %.4f, c_h %.4f, threshold N^c_h = %ld; %d/20 seeds with count/N >= 0.8 * "
              "eta(0,0.95) = %.4f (min count/N %.4f)",
              c1_used, c_used, static_cast<long>(threshold), good, 0.8 * eta.survival_fraction,
              lo)};
}

// ---------------------------------------------------------------- 9
Outcome sprinkling() {
  SprinkleConfig cfg;
  cfg.eta_ref = estimate_eta(3, cfg.h_prime, cfg.p, kNegInf, 20, 100000, 99).survival_fraction;
  cfg.lambda_ref = lambda_h(3, cfg.h_prime);
  std::vector<double> freq;
  std::string detail = fmt("eta(h'=0.2, p=0.95) %.4f;", cfg.eta_ref);
  for (int n : {5000, 10000, 20000}) {
    cfg.n = n;
    int merged = 0, centred = 0, tnfix = 0;
    for (std::uint64_t s = 1; s <= 20; ++s) {
      auto rec = sprinkling_run(cfg, s);
      merged += rec.merged;
      centred += rec.centering_ok;
      tnfix += rec.tnfix_ok;
    }
    freq.push_back(merged / 20.0);
    detail += fmt(" N=%d merged %d/20, centering ok %d/20, t-schedule check %d/20;", n, merged,
                  centred, tnfix);
  }
  const bool pass = freq[1] >= freq[0] && freq[2] >= freq[1] && freq[2] >= 0.9;
  return {pass, detail};
}

// ---------------------------------------------------------------- 10
std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism(const std::string& cli) {
  if (cli.empty()) return {false, "no CLI path given"};
  const std::vector<std::pair<std::string, std::string>> configs = {
      {"green-validate", "n = 32\nd = 3\nseed = 1\n"},
      {"sampler-validate", "n = 16\nd = 3\nseed = 1\nreplicas = 600\nk_max = 60\n"},
      {"tree-eta", "d = 3\nh = 0.5\ndepth = 8\nreplicas = 200\nseed = 5\n"},
      {"operator-sweep", "d = 3\nn_nodes = 64\nh_min = -1\nh_max = 1\nh_step = 0.5\n"},
      {"hstar", "d = 4\nn_nodes = 64\ntol = 1e-4\n"},
      {"coupling-tail", "n = 2000\nd = 3\nseed = 1\nreplicas = 20\nr = 1,2\nk_max = 200\n"},
      {"giant",
       "n = 2000\nd = 3\nh = 0\nseed = 1\nreplicas = 3\neta_depth = 8\neta_replicas = 200\n"},
      {"mesoscopic",
       "n = 2000\nd = 3\nh = 0\np = 0.95\nt = 0.1\nseed = 1\nreplicas = 3\neta_depth = 8\n"
       "eta_replicas = 200\n"},
      {"sprinkle",
       "n = 2000\nd = 3\nh = 0\nh_prime = 0.2\np = 0.95\nseed = 1\nreplicas = 3\n"
       "eta_depth = 8\neta_replicas = 200\n"},
  };
  const fs::path root = fs::temp_directory_path() / "gffperc_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  int identical = 0;
  std::string bad;
  long files = 0;
  for (const auto& [name, text] : configs) {
    const fs::path cfg = root / (name + ".cfg");
    std::ofstream(cfg) << text;
    bool ok = true;
    for (const char* run : {"a", "b"}) {
      const std::string cmd = "\"" + cli + "\" " + name + " --config \"" + cfg.string() +
                              "\" --out \"" + (root / name / run).string() + "\" --threads " +
                              (run[0] == 'a' ? "1" : "2") + " > /dev/null 2>&1";
      ok = ok && std::system(cmd.c_str()) == 0;
    }
    if (ok) {
      auto manifest = nlohmann::json::parse(read_file(root / name / "a" / "manifest.json"));
      for (const auto& f : manifest["files"]) {
        const std::string path = f["path"];
        ++files;
        ok = ok && read_file(root / name / "a" / path) == read_file(root / name / "b" / path);
      }
    }
    if (ok) ++identical;
    else bad += " " + name;
  }
  fs::remove_all(root);
  return {identical == static_cast<int>(configs.size()),
          fmt("%d/%zu experiments byte-identical across reruns (threads 1 vs 2), %ld files%s%s",
              identical, configs.size(), files, bad.empty() ? "" : "; differing:", bad.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  std::setvbuf(stdout, nullptr, _IONBF, 0);
  const std::string cli = argc > 1 ? argv[1] : "";
  std::vector<int> only;
  for (int i = 2; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Green-function oracle (K4)", green_oracle},
      {"Decomposition covariance (K4, N=64, 1e5 replicas)", decomposition},
      {"Conditional law of the sprinkle component on trees", conditional_lemma},
      {"Operator sanity", operator_sanity},
      {"h* consistency", hstar_consistency},
      {"Graph-tree coupling", coupling},
      {"Giant component at desk scale", giant},
      {"Mesoscopic components", mesoscopic},
      {"Sprinkling merge", sprinkling},
      {"Determinism", [&] { return determinism(cli); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && std::find(only.begin(), only.end(), static_cast<int>(i + 1)) == only.end())
      continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2zu %s [%.1fs]: %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), secs, o.detail.c_str());
    failed += !o.pass;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
