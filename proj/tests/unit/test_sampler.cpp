#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "doctest.h"
#include "gffperc/errors.hpp"
#include "gffperc/graph.hpp"
#include "gffperc/midpoint.hpp"
#include "gffperc/sampler.hpp"
#include "gffperc/spectral.hpp"
#include "gffperc/stats.hpp"
#include "gffperc/walk_green.hpp"
#include "json.hpp"

using namespace gffperc;

namespace {

Eigen::MatrixXd walk_matrix(const MidpointGraph& mg) {
  const int m = mg.n_total();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m, m);
  for (int v = 0; v < m; ++v)
    for (int u : mg.neighbors(v)) q(v, u) += 1.0 / mg.degree(v);
  return q;
}

// Exact covariance of xi^k on the originals: A D A^T with A = (I - J/N) [Q^k]_{orig}.
Eigen::MatrixXd layer_covariance(const MidpointGraph& mg, int k) {
  const int n = mg.n_original(), m = mg.n_total();
  Eigen::MatrixXd qk = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd q = walk_matrix(mg);
  for (int i = 0; i < k; ++i) qk = qk * q;
  Eigen::MatrixXd a = qk.topRows(n);
  a.rowwise() -= a.colwise().mean();
  Eigen::VectorXd var(m);
  for (int v = 0; v < m; ++v) var(v) = z_sd(mg, v) * z_sd(mg, v);
  return a * var.asDiagonal() * a.transpose();
}

}  // namespace

TEST_CASE("project_pi") {
  Graph k4 = complete_graph(4);
  MidpointGraph mg(k4);
  std::vector<double> ones(10, 1.0);
  CHECK(project_pi(mg, ones, 0) == doctest::Approx(1.0));
  CHECK(project_pi(mg, mg.parity_vector(), 2) == doctest::Approx(1.0));
  std::vector<double> mids(10, 0.0);
  for (int v = 4; v < 10; ++v) mids[v] = v;
  CHECK(project_pi(mg, mids, 1) == 0.0);
  CHECK_THROWS_AS(project_pi(mg, ones, 5), InvalidArgument);
}

TEST_CASE("layer covariance identity") {
  for (Graph g : {complete_graph(4), build_random_regular(20, 3, 2)}) {
    MidpointGraph mg(g);
    const int n = g.n_vertices();
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n) * 0.5;
    for (int x = 0; x < n; ++x)
      for (int y : g.neighbors(x)) p(x, y) += 0.5 / g.degree();
    Eigen::MatrixXd pk = Eigen::MatrixXd::Identity(n, n);
    for (int k = 0; k <= 6; ++k) {
      Eigen::MatrixXd expected = 0.5 * (pk.array() - 1.0 / n).matrix();
      CHECK((layer_covariance(mg, k) - expected).cwiseAbs().maxCoeff() < 1e-12);
      pk = pk * p;
    }
  }
}

TEST_CASE("exact sampler on K4") {
  Graph k4 = complete_graph(4);
  Eigen::MatrixXd cov = covariance_table(zero_average_green(k4));
  ExactSampler s(cov);
  CHECK(s.rank() == 3);
  CovarianceAccumulator acc(4);
  NormalSource src(5, Stream::exact);
  std::vector<double> v(4);
  for (int r = 0; r < 100000; ++r) {
    s.sample_into(src, v);
    CHECK(std::abs(v[0] + v[1] + v[2] + v[3]) < 1e-8 * 4);
    acc.add(v);
  }
  Eigen::MatrixXd emp = acc.covariance();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(std::abs(emp(i, j) - cov(i, j)) < 0.01);
  CHECK(sample_exact(cov, 3).values == sample_exact(cov, 3).values);

  Eigen::MatrixXd bad = -Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(ExactSampler{bad}, NumericalError);
}

TEST_CASE("decomposition sampler on K4") {
  Graph k4 = complete_graph(4);
  MidpointGraph mg(k4);
  Eigen::MatrixXd cov = covariance_table(zero_average_green(k4));
  CovarianceAccumulator acc(4);
  for (int r = 0; r < 100000; ++r) {
    auto [f, zl] = sample_decomposition(mg, 60, 17, r);
    CHECK(std::abs(f.sum()) < 1e-9 * 4);
    acc.add(f.values);
  }
  Eigen::MatrixXd emp = acc.covariance();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(std::abs(emp(i, j) - cov(i, j)) < 0.01);
}

TEST_CASE("Horner evaluation matches term-by-term sum") {
  Graph g = build_random_regular(30, 3, 4);
  MidpointGraph mg(g);
  auto [f, zl] = sample_decomposition(mg, 25, 8, 0, true);
  REQUIRE(zl.complete());
  std::vector<double> direct(30, 0.0);
  for (int k = 0; k <= 25; ++k) {
    auto xi = layer_term(mg, zl.layers[k], k);
    double s = 0.0;
    for (double v : xi) s += v;
    CHECK(std::abs(s) < 1e-12);
    for (int x = 0; x < 30; ++x) direct[x] += xi[x];
  }
  for (int x = 0; x < 30; ++x) CHECK(f.values[x] == doctest::Approx(direct[x]).epsilon(1e-10));
  // Keeping layers does not change the draw.
  auto [f2, zl2] = sample_decomposition(mg, 25, 8, 0, false);
  CHECK(f2.values == f.values);
}

TEST_CASE("single layer Monte Carlo covariance on K4") {
  Graph k4 = complete_graph(4);
  MidpointGraph mg(k4);
  for (int k : {1, 2}) {
    Eigen::MatrixXd exact = layer_covariance(mg, k);
    CovarianceAccumulator acc(4);
    NormalSource src(k, Stream::replica);
    std::vector<double> z(10);
    for (int r = 0; r < 100000; ++r) {
      for (int v = 0; v < 10; ++v) z[v] = src(z_sd(mg, v));
      acc.add(layer_term(mg, z, k));
    }
    CHECK((acc.covariance() - exact).cwiseAbs().maxCoeff() < 0.01);
  }
}

TEST_CASE("truncation decay of layer variance") {
  Graph g = build_random_regular(40, 3, 9);
  MidpointGraph mg(g);
  const double gap = spectral_gap(g);
  for (int k : {5, 20, 40}) {
    // Var xi^k(x) = (P^k(x,x) - 1/N)/2, bounded by exp(-gap k)/2.
    Eigen::MatrixXd c = layer_covariance(mg, 2 * k);
    CHECK(c.diagonal().maxCoeff() <= 0.5 * std::exp(-gap * 2 * k) + 1e-12);
  }
  CHECK(default_k_max(0.5) == 80);
  CHECK(k_max_for_bias(complete_graph(4), 1e-8) < 20);
}

TEST_CASE("split sprinkle") {
  Graph k4 = complete_graph(4);
  MidpointGraph mg(k4);
  SUBCASE("t = 0") {
    auto [f, zl] = sample_decomposition(mg, 60, 1);
    auto [a, b] = split_sprinkle(mg, zl, 0.0, 2);
    for (int x = 0; x < 4; ++x) {
      CHECK(b.values[x] == 0.0);
      CHECK(a.values[x] == doctest::Approx(f.values[x]).epsilon(1e-12));
    }
  }
  SUBCASE("sum identity and independence") {
    const int reps = 100000;
    std::vector<std::vector<double>> p1(4, std::vector<double>(reps)), p2 = p1;
    CovarianceAccumulator acc1(4), acc2(4);
    for (int r = 0; r < reps; ++r) {
      auto [f, zl] = sample_decomposition(mg, 40, 3, r);
      auto [a, b] = split_sprinkle(mg, zl, 0.6, 4, r);
      for (int x = 0; x < 4; ++x) {
        CHECK(std::abs(a.values[x] + b.values[x] - f.values[x]) < 1e-12);
        p1[x][r] = a.values[x];
        p2[x][r] = b.values[x];
      }
      acc1.add(a.values);
      acc2.add(b.values);
    }
    for (int x = 0; x < 4; ++x)
      for (int y = 0; y < 4; ++y) CHECK(std::abs(correlation(p1[x], p2[y])) <= 3.0 / std::sqrt(reps));
    // Psi^2 = t xi^{0,2}: covariance t^2/2 (I - J/4).
    Eigen::MatrixXd c2 = acc2.covariance();
    CHECK(c2(0, 0) == doctest::Approx(0.36 * 0.5 * 0.75).epsilon(0.02));
  }
  SUBCASE("range") {
    auto [f, zl] = sample_decomposition(mg, 5, 1);
    CHECK_THROWS_AS(split_sprinkle(mg, zl, 1.0, 1), InvalidArgument);
    CHECK_THROWS_AS(split_sprinkle(mg, zl, -0.1, 1), InvalidArgument);
  }
}

TEST_CASE("fresh split has the field law") {
  Graph k4 = complete_graph(4);
  MidpointGraph mg(k4);
  Eigen::MatrixXd cov = covariance_table(zero_average_green(k4));
  CovarianceAccumulator acc(4);
  for (int r = 0; r < 50000; ++r) {
    SplitSample s = sample_split(mg, 60, 0.5, 6, r);
    CHECK(std::abs(s.psi.sum()) < 1e-9);
    CHECK(std::abs(s.psi2.sum()) < 1e-9);
    acc.add(s.psi.values);
  }
  CHECK((acc.covariance() - cov).cwiseAbs().maxCoeff() < 0.015);
}

TEST_CASE("bar psi2") {
  Graph g = build_random_regular(50, 3, 1);
  Field zero = sample_bar_psi2(g, 0.0, 1);
  for (double v : zero.values) CHECK(v == 0.0);
  std::vector<double> col(20000);
  for (int r = 0; r < 20000; ++r) {
    Field f = sample_bar_psi2(g, 0.5, 7, r);
    CHECK(std::abs(f.sum()) < 1e-12);
    col[r] = f.values[3];
  }
  CHECK(sample_variance(col) == doctest::Approx(0.25 * 0.5 * (1 - 1.0 / 50)).epsilon(0.03));
}

TEST_CASE("sampler equivalence by KS") {
  Graph g = build_random_regular(64, 3, 1);
  MidpointGraph mg(g);
  Eigen::MatrixXd cov = covariance_table(zero_average_green(g));
  ExactSampler ex(cov);
  const int k_max = k_max_for_bias(g, 1e-3);
  const int reps = 10000;
  std::vector<std::vector<double>> a(3, std::vector<double>(reps)), b = a;
  NormalSource src(2, Stream::exact);
  std::vector<double> v(64);
  for (int r = 0; r < reps; ++r) {
    ex.sample_into(src, v);
    auto [f, zl] = sample_decomposition(mg, k_max, 3, r);
    for (int i = 0; i < 3; ++i) {
      a[i][r] = v[i * 20];
      b[i][r] = f.values[i * 20];
    }
  }
  for (int i = 0; i < 3; ++i) CHECK(ks_two_sample(a[i], b[i]).p_value > 1e-3);
}

TEST_CASE("field IO") {
  Field f;
  f.values = {0.5, -0.5};
  f.provenance = Provenance::split2;
  f.seed = 9;
  f.t = 0.25;
  std::ostringstream csv, js;
  write_field_csv(csv, f);
  CHECK(csv.str() == "vertex,value\n0,0.5\n1,-0.5\n");
  write_field_sidecar(js, f);
  auto j = nlohmann::json::parse(js.str());
  CHECK(j["provenance"] == "split2");
  CHECK(j["seed"] == 9);
  CHECK(j["t"] == 0.25);
  CHECK(j["k_max"].is_null());
}

TEST_CASE("KS helper") {
  NormalSource s(1, Stream::replica);
  std::vector<double> a(5000), b(5000), c(5000);
  for (int i = 0; i < 5000; ++i) a[i] = s(), b[i] = s(), c[i] = s() + 0.2;
  CHECK(ks_two_sample(a, b).p_value > 1e-3);
  CHECK(ks_two_sample(a, c).p_value < 1e-6);
}
