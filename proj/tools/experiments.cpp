#include "experiments.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "gffperc/coupling.hpp"
#include "gffperc/errors.hpp"
#include "gffperc/operator.hpp"
#include "gffperc/parallel.hpp"
#include "gffperc/percolation.hpp"
#include "gffperc/rng.hpp"
#include "gffperc/sampler.hpp"
#include "gffperc/spectral.hpp"
#include "gffperc/stats.hpp"
#include "gffperc/tree_gff.hpp"
#include "gffperc/walk_green.hpp"
#include "json.hpp"

namespace gffperc::cli {

namespace {

using json = nlohmann::ordered_json;

json num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

class Emitter {
 public:
  explicit Emitter(const RunOptions& opt) : dir_(opt.out) {}

  std::ofstream open(const std::string& name) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir_ / name).string());
    files_.push_back(name);
    return out;
  }
  void write_json(const std::string& name, const json& j) { open(name) << j.dump(2) << "\n"; }
  std::vector<std::string> files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

int k_max_for(const Graph& g, const Config& cfg) {
  const auto k = cfg.get_int("k_max");
  return k > 0 ? static_cast<int>(k) : default_k_max(spectral_gap(g));
}

double eta_reference(const Config& cfg, double h, double p, std::uint64_t seed, int threads) {
  if (std::isinf(h) && h < 0 && p == 1.0) return 1.0;
  auto est = estimate_eta(static_cast<int>(cfg.get_int("d")), h, p, kNegInf,
                          static_cast<int>(cfg.get_int("eta_depth")), cfg.get_int("eta_replicas"),
                          seed, threads);
  return est.survival_fraction;
}

std::vector<std::string> green_validate(const Config& cfg, const RunOptions& opt) {
  Emitter em(opt);
  const int n = static_cast<int>(cfg.get_int("n")), d = static_cast<int>(cfg.get_int("d"));
  Graph g = build_random_regular(n, d, cfg.get_seed("seed"));
  {
    auto out = em.open("graph.txt");
    write_edge_list(out, g);
  }
  auto table = zero_average_green(g);
  auto cov = covariance_table(table);
  {
    auto out = em.open("covariance.csv");
    write_covariance_csv(out, cov);
  }
  auto fit = fit_green_decay(table);
  json j;
  j["n"] = n;
  j["d"] = d;
  j["seed"] = cfg.get_seed("seed");
  j["gap"] = spectral_gap(g);
  j["c0"] = table.c0;
  j["gbar_diag_min"] = table.gbar.diagonal().minCoeff();
  j["gbar_diag_max"] = table.gbar.diagonal().maxCoeff();
  j["row_sum_max_abs"] = table.gbar.rowwise().sum().cwiseAbs().maxCoeff();
  j["decay_c"] = fit.c;
  j["decay_epsilon"] = fit.epsilon;
  j["max_gbar_by_distance"] = fit.max_by_distance;
  em.write_json("green.json", j);
  return em.files();
}

std::vector<std::string> sampler_validate(const Config& cfg, const RunOptions& opt) {
  Emitter em(opt);
  const int n = static_cast<int>(cfg.get_int("n")), d = static_cast<int>(cfg.get_int("d"));
  const std::uint64_t seed = cfg.get_seed("seed");
  const long replicas = cfg.get_int("replicas");
  Graph g = build_random_regular(n, d, seed);
  const int k_max = cfg.get_int("k_max") > 0 ? static_cast<int>(cfg.get_int("k_max"))
                                             : k_max_for_bias(g, cfg.get_double("bias"));
  auto exact = covariance_table(zero_average_green(g));
  MidpointGraph mg(g);

  // Fixed blocks, merged in order, keep the sums independent of the thread count.
  const long block = 512, n_blocks = (replicas + block - 1) / block;
  std::vector<CovarianceAccumulator> acc(n_blocks, CovarianceAccumulator(n));
  std::vector<double> worst_sum(n_blocks, 0.0);
  parallel_replicas(n_blocks, opt.threads, [&](long b, int) {
    for (long r = b * block; r < std::min(replicas, (b + 1) * block); ++r) {
      auto f = sample_decomposition(mg, k_max, seed, r).first;
      acc[b].add(f.values);
      worst_sum[b] = std::max(worst_sum[b], std::abs(f.sum()));
    }
  });
  CovarianceAccumulator total(n);
  double max_sum = 0.0;
  for (long b = 0; b < n_blocks; ++b) {
    total.merge(acc[b]);
    max_sum = std::max(max_sum, worst_sum[b]);
  }
  const double err = (total.covariance() - exact).cwiseAbs().maxCoeff();

  auto first = sample_decomposition(mg, k_max, seed, 0).first;
  {
    auto out = em.open("field.csv");
    write_field_csv(out, first);
  }
  {
    auto out = em.open("field.json");
    write_field_sidecar(out, first);
  }
  json j;
  j["n"] = n;
  j["d"] = d;
  j["seed"] = seed;
  j["k_max"] = k_max;
  j["replicas"] = replicas;
  j["max_covariance_error"] = err;
  j["max_abs_sum"] = max_sum;
  em.write_json("sampler.json", j);
  return em.files();
}

std::vector<std::string> tree_eta(const Config& cfg, const RunOptions& opt) {
  Emitter em(opt);
  const int d = static_cast<int>(cfg.get_int("d")), depth = static_cast<int>(cfg.get_int("depth"));
  const double h = cfg.get_double("h"), p = cfg.get_double("p"), gamma = cfg.get_double("gamma");
  auto est = estimate_eta(d, h, p, gamma, depth, cfg.get_int("replicas"), cfg.get_seed("seed"),
                          opt.threads, true);
  {
    auto out = em.open("fronts.csv");
    out << "replica,level,front_size,survived\n";
    for (std::size_t r = 0; r < est.fronts.size(); ++r) {
      const auto& fr = est.fronts[r];
      const int survived = !fr.empty() && fr.back() > 0;
      for (std::size_t k = 0; k < fr.size(); ++k)
        out << r << ',' << k << ',' << fr[k] << ',' << survived << '\n';
    }
  }
  json j;
  j["d"] = d;
  j["h"] = num(h);
  j["p"] = p;
  j["gamma"] = num(gamma);
  j["depth"] = depth;
  j["replicas"] = est.replicas;
  j["seed"] = cfg.get_seed("seed");
  j["eta"] = est.survival_fraction;
  j["ci_halfwidth"] = est.ci_halfwidth;
  j["mean_front"] = est.mean_front;
  em.write_json("eta.json", j);
  return em.files();
}

std::vector<std::string> operator_sweep(const Config& cfg, const RunOptions& opt) {
  Emitter em(opt);
  const int d = static_cast<int>(cfg.get_int("d")), nodes = static_cast<int>(cfg.get_int("n_nodes"));
  const double p = cfg.get_double("p"), gamma = cfg.get_double("gamma");
  const double lo = cfg.get_double("h_min"), hi = cfg.get_double("h_max"),
               step = cfg.get_double("h_step");
  const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> lambda(count);
  parallel_replicas(count, opt.threads, [&](long i, int) {
    lambda[i] = principal_eigen(build_operator(d, lo + i * step, p, gamma, nodes)).lambda;
  });
  auto out = em.open("lambda.csv");
  out << "h,p,gamma,lambda,n_nodes\n";
  for (int i = 0; i < count; ++i)
    out << fmt(lo + i * step) << ',' << fmt(p) << ',' << fmt(gamma) << ',' << fmt(lambda[i]) << ','
        << nodes << '\n';
  return em.files();
}

std::vector<std::string> hstar(const Config& cfg, const RunOptions& opt) {
  Emitter em(opt);
  const int d = static_cast<int>(cfg.get_int("d"));
  HStarConfig hc;
  hc.n_nodes = static_cast<int>(cfg.get_int("n_nodes"));
  const double tol = cfg.get_double("tol");
  json j;
  j["d"] = d;
  j["h_star"] = h_star(d, tol, hc);
  j["n_nodes"] = hc.n_nodes;
  j["tol"] = tol;
  em.write_json("hstar.json", j);
  return em.files();
}

std::vector<std::string> coupling_tail(const Config& cfg, const RunOptions& opt) {
  Emitter em(opt);
  const int n = static_cast<int>(cfg.get_int("n")), d = static_cast<int>(cfg.get_int("d"));
  const std::uint64_t seed = cfg.get_seed("seed");
  const long replicas = cfg.get_int("replicas");
  const auto radii = cfg.get_ints("r");
  const auto eps = cfg.get_doubles("eps");
  Graph g = build_random_regular(n, d, seed);
  const int k_max = k_max_for(g, cfg);
  const int r_top = static_cast<int>(*std::max_element(radii.begin(), radii.end()));
  auto pair = find_coupling_pair(g, r_top);
  if (!pair)
    throw Error("no pair of " + std::to_string(2 * r_top) + "-treelike vertices at distance > " +
                std::to_string(4 * r_top));
  auto csv = em.open("coupling.csv");
  csv << "replica,r,eps,D_x,D_xprime\n";
  json summary = json::array();
  for (auto r : radii) {
    auto plan = plan_coupling(g, pair->first, pair->second, static_cast<int>(r), k_max);
    std::vector<std::pair<double, double>> D(replicas);
    std::vector<double> id_err(replicas);
    std::vector<char> exact(replicas);
    parallel_replicas(replicas, opt.threads, [&](long i, int) {
      auto cs = build_coupled(plan, seed, i);
      D[i] = measure_D(cs);
      id_err[i] = identity_error(cs);
      exact[i] = cs.sharing_exact;
    });
    json row;
    row["r"] = r;
    row["x"] = pair->first;
    row["x_prime"] = pair->second;
    row["k_max"] = k_max;
    row["max_identity_error"] = *std::max_element(id_err.begin(), id_err.end());
    row["sharing_exact"] = std::all_of(exact.begin(), exact.end(), [](char c) { return c != 0; });
    json tails = json::object();
    for (double e : eps) {
      long above = 0;
      for (long i = 0; i < replicas; ++i) {
        csv << i << ',' << r << ',' << fmt(e) << ',' << fmt(D[i].first) << ','
            << fmt(D[i].second) << '\n';
        above += std::max(D[i].first, D[i].second) > e;
      }
      tails[fmt(e)] = static_cast<double>(above) / replicas;
    }
    row["tail_fraction"] = tails;
    summary.push_back(row);
  }
  csv.close();
  em.write_json("coupling.json", summary);
  return em.files();
}

std::vector<std::string> giant(const Config& cfg, const RunOptions& opt) {
  Emitter em(opt);
  const int n = static_cast<int>(cfg.get_int("n")), d = static_cast<int>(cfg.get_int("d"));
  const double h = cfg.get_double("h");
  const std::uint64_t seed = cfg.get_seed("seed");
  const long replicas = cfg.get_int("replicas");
  const int k_max = static_cast<int>(cfg.get_int("k_max"));
  const double eta = eta_reference(cfg, h, 1.0, seed, opt.threads);
  std::vector<GiantResult> res(replicas);
  parallel_replicas(replicas, opt.threads, [&](long i, int) {
    res[i] = giant_experiment(n, d, h, replica_seed(seed, i), k_max);
  });
  auto out = em.open("giant.jsonl");
  for (const auto& r : res) {
    json j;
    j["seed"] = r.seed;
    j["n"] = r.n;
    j["d"] = r.d;
    j["h"] = num(r.h);
    j["k_max"] = r.k_max;
    j["level_size"] = r.level_size;
    j["c_max"] = r.c_max;
    j["c_sec"] = r.c_sec;
    j["eta_ref"] = eta;
    out << j.dump() << '\n';
  }
  return em.files();
}

std::vector<std::string> mesoscopic(const Config& cfg, const RunOptions& opt) {
  Emitter em(opt);
  const int n = static_cast<int>(cfg.get_int("n")), d = static_cast<int>(cfg.get_int("d"));
  const double h = cfg.get_double("h"), p = cfg.get_double("p"), t = cfg.get_double("t");
  const std::uint64_t seed = cfg.get_seed("seed");
  const long replicas = cfg.get_int("replicas");
  const double eta = eta_reference(cfg, h, p, seed, opt.threads);
  const double lambda = lambda_h(d, h);
  ReducedGraphParams rgp{cfg.get_double("K"), l_from_p(p), p, t};
  std::vector<json> rows(replicas);
  parallel_replicas(replicas, opt.threads, [&](long i, int) {
    const std::uint64_t s = replica_seed(seed, i);
    Graph g = build_random_regular(n, d, s);
    MidpointGraph mg(g);
    auto split = sample_split(mg, k_max_for(g, cfg), t, s);
    auto zbar = sample_bar_z2(g, s);
    auto scale = treelike_scale(g, cfg.get_double("treelike_fraction"));
    const double c = mesoscopic_exponent(scale.c1, p, lambda, cfg.get_double("delta_prime"));
    auto m = mesoscopic_scan(g, split.psi1.values, split.psi.values, zbar, rgp, h, c);
    json j;
    j["seed"] = s;
    j["n"] = n;
    j["d"] = d;
    j["h"] = num(h);
    j["p"] = p;
    j["t"] = t;
    j["c1"] = scale.c1;
    j["c_h"] = c;
    j["threshold"] = m.threshold;
    j["meso_count"] = m.count;
    j["meso_fraction"] = static_cast<double>(m.count) / n;
    j["meso_components"] = m.n_components;
    j["eta_ref"] = eta;
    rows[i] = std::move(j);
  });
  auto out = em.open("mesoscopic.jsonl");
  for (const auto& j : rows) out << j.dump() << '\n';
  return em.files();
}

std::vector<std::string> sprinkle(const Config& cfg, const RunOptions& opt) {
  Emitter em(opt);
  SprinkleConfig sc;
  sc.n = static_cast<int>(cfg.get_int("n"));
  sc.d = static_cast<int>(cfg.get_int("d"));
  sc.h = cfg.get_double("h");
  sc.h_prime = cfg.get_double("h_prime");
  sc.p = cfg.get_double("p");
  if (cfg.get_string("t") != "auto") sc.t = cfg.get_double("t");
  sc.delta = cfg.get_double("delta");
  sc.delta_prime = cfg.get_double("delta_prime");
  sc.K0 = cfg.get_double("K0");
  sc.beta_prime = cfg.get_double("beta_prime");
  sc.treelike_fraction = cfg.get_double("treelike_fraction");
  sc.k_max = static_cast<int>(cfg.get_int("k_max"));
  const std::uint64_t seed = cfg.get_seed("seed");
  const long replicas = cfg.get_int("replicas");
  sc.eta_ref = eta_reference(cfg, sc.h_prime, sc.p, seed, opt.threads);
  sc.lambda_ref = lambda_h(sc.d, sc.h_prime);
  std::vector<std::string> lines(replicas);
  parallel_replicas(replicas, opt.threads, [&](long i, int) {
    lines[i] = to_json_line(sprinkling_run(sc, replica_seed(seed, i)));
  });
  auto out = em.open("sprinkle.jsonl");
  for (const auto& l : lines) out << l << '\n';
  return em.files();
}

}  // namespace

std::uint64_t replica_seed(std::uint64_t master, long i) {
  return stream_seed(master, Stream::replica, static_cast<std::uint64_t>(i));
}

std::vector<std::string> run_experiment(const std::string& name, const Config& cfg,
                                        const RunOptions& opt) {
  if (name == "green-validate") return green_validate(cfg, opt);
  if (name == "sampler-validate") return sampler_validate(cfg, opt);
  if (name == "tree-eta") return tree_eta(cfg, opt);
  if (name == "operator-sweep") return operator_sweep(cfg, opt);
  if (name == "hstar") return hstar(cfg, opt);
  if (name == "coupling-tail") return coupling_tail(cfg, opt);
  if (name == "giant") return giant(cfg, opt);
  if (name == "mesoscopic") return mesoscopic(cfg, opt);
  if (name == "sprinkle") return sprinkle(cfg, opt);
  throw ConfigError("unknown experiment '" + name + "'");
}

}  // namespace gffperc::cli
