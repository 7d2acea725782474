#include "gffperc/sampler.hpp"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "gffperc/errors.hpp"
#include "gffperc/walk_green.hpp"
#include "json.hpp"

namespace gffperc {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::cholesky: return "cholesky";
    case Provenance::decomposition: return "decomposition";
    case Provenance::split1: return "split1";
    case Provenance::split2: return "split2";
    case Provenance::bar2: return "bar2";
    case Provenance::sum: return "sum";
  }
  return "unknown";
}

double Field::sum() const { return std::accumulate(values.begin(), values.end(), 0.0); }

ExactSampler::ExactSampler(const Eigen::MatrixXd& cov, double tol) {
  if (cov.rows() != cov.cols()) throw InvalidArgument("covariance must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double top = std::max(ev.maxCoeff(), 0.0);
  if (ev.minCoeff() < -tol * std::max(top, 1.0))
    throw NumericalError("covariance not positive semidefinite (min eigenvalue " +
                         std::to_string(ev.minCoeff()) + ")");
  std::vector<int> keep;
  for (int i = 0; i < ev.size(); ++i)
    if (ev(i) > tol * top) keep.push_back(i);
  factor_.resize(cov.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    factor_.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]) * std::sqrt(ev(keep[j]));
}

void ExactSampler::sample_into(NormalSource& src, std::span<double> out) const {
  Eigen::VectorXd z(factor_.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = src();
  Eigen::Map<Eigen::VectorXd>(out.data(), factor_.rows()).noalias() = factor_ * z;
}

Field ExactSampler::sample(std::uint64_t seed) const {
  NormalSource src(seed, Stream::exact);
  Field f;
  f.values.resize(factor_.rows());
  sample_into(src, f.values);
  f.provenance = Provenance::cholesky;
  f.seed = seed;
  return f;
}

Field sample_exact(const Eigen::MatrixXd& cov, std::uint64_t seed) {
  return ExactSampler(cov).sample(seed);
}

double project_pi(const MidpointGraph& mg, std::span<const double> f, int x) {
  if (x < 0 || mg.is_midpoint(x)) throw InvalidArgument("project_pi: x must be an original vertex");
  const int n = mg.n_original();
  double s = 0.0;
  for (int y = 0; y < n; ++y) s += f[y];
  return s / n;
}

int default_k_max(double gap) {
  if (!(gap > 0)) throw InvalidArgument("spectral gap must be positive");
  return static_cast<int>(std::ceil(40.0 / gap));
}

int k_max_for_bias(const Graph& g, double bias) {
  const int n = g.n_vertices();
  Eigen::MatrixXd remainder = zero_average_green(g).green();  // sum_{k>=0}(P^k - 1/N)
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  const double inv_n = 1.0 / n;
  for (int k = 0;; ++k) {
    remainder -= power;
    remainder.array() += inv_n;
    if (0.5 * remainder.cwiseAbs().maxCoeff() <= bias) return k;
    std::vector<double> col(n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) col[i] = power(i, j);
      auto next = lazy_step(g, col);
      for (int i = 0; i < n; ++i) power(i, j) = next[i];
    }
    if (k > 1000000) throw NumericalError("k_max_for_bias did not converge");
  }
}

namespace {

void center_originals(std::span<double> v, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += v[i];
  s /= n;
  for (int i = 0; i < n; ++i) v[i] -= s;
}

void draw_layer(const MidpointGraph& mg, NormalSource& src, std::span<double> z) {
  const int n = mg.n_original();
  const double so = std::sqrt(0.5);
  const double sm = std::sqrt(mg.base().degree() / 4.0);
  for (int v = 0; v < n; ++v) z[v] = so * src();
  for (int v = n; v < mg.n_total(); ++v) z[v] = sm * src();
}

// Draws layers k_max..1 and returns v = sum_{k>=1} Q^{k-1} Z_k (on all of G~),
// so that sum_{k>=1} Q^k Z_k = Q v.
std::vector<double> horner_from_one(const MidpointGraph& mg, int k_max, NormalSource& src,
                                    std::vector<std::vector<double>>* keep) {
  const std::size_t m = mg.n_total();
  std::vector<double> v(m, 0.0), z(m), tmp(m);
  for (int k = k_max; k >= 1; --k) {
    draw_layer(mg, src, z);
    if (k < k_max) {
      mg.apply_walk(v, tmp);
      for (std::size_t i = 0; i < m; ++i) v[i] = tmp[i] + z[i];
    } else {
      v = z;
    }
    if (keep) (*keep)[k] = z;
  }
  return v;
}

std::vector<double> higher_terms(const MidpointGraph& mg, int k_max, NormalSource& src,
                                 std::vector<std::vector<double>>* keep) {
  const int n = mg.n_original();
  std::vector<double> out(n, 0.0);
  if (k_max < 1) return out;
  std::vector<double> v = horner_from_one(mg, k_max, src, keep);
  std::vector<double> qv(v.size());
  mg.apply_walk(v, qv);
  out.assign(qv.begin(), qv.begin() + n);
  center_originals(out, n);
  return out;
}

}  // namespace

std::vector<double> layer_term(const MidpointGraph& mg, std::span<const double> z, int k) {
  std::vector<double> a(z.begin(), z.end()), b(z.size());
  for (int i = 0; i < k; ++i) {
    mg.apply_walk(a, b);
    std::swap(a, b);
  }
  a.resize(mg.n_original());
  center_originals(a, mg.n_original());
  return a;
}

std::pair<Field, ZLayers> sample_decomposition(const MidpointGraph& mg, int k_max,
                                               std::uint64_t seed, std::uint64_t index,
                                               bool keep_layers) {
  if (k_max < 0) throw InvalidArgument("k_max must be nonnegative");
  NormalSource src(seed, Stream::z_layers, index);
  const int n = mg.n_original();
  ZLayers zl;
  zl.k_max = k_max;
  zl.layers.resize(keep_layers ? k_max + 1 : 1);
  zl.higher = higher_terms(mg, k_max, src, keep_layers ? &zl.layers : nullptr);
  std::vector<double> z0(mg.n_total());
  draw_layer(mg, src, z0);
  zl.layers[0] = z0;

  Field f;
  f.values.assign(z0.begin(), z0.begin() + n);
  center_originals(f.values, n);
  for (int x = 0; x < n; ++x) f.values[x] += zl.higher[x];
  f.provenance = Provenance::decomposition;
  f.seed = seed;
  f.k_max = k_max;
  return {std::move(f), std::move(zl)};
}

std::pair<Field, Field> split_sprinkle(const MidpointGraph& mg, const ZLayers& zl, double t,
                                       std::uint64_t seed2, std::uint64_t index) {
  if (!(t >= 0.0 && t < 1.0)) throw InvalidArgument("t must lie in [0, 1)");
  if (zl.layers.empty() || zl.layers[0].size() != static_cast<std::size_t>(mg.n_total()))
    throw InvalidArgument("Z-layers lack layer 0");
  const int n = mg.n_original();
  const double s = std::sqrt(1.0 - t * t);
  NormalSource src(seed2, Stream::split, index);
  std::vector<double> e(mg.n_total());
  draw_layer(mg, src, e);
  const auto& z0 = zl.layers[0];
  std::vector<double> z1(n), z2(n);
  for (int x = 0; x < n; ++x) {
    z1[x] = s * z0[x] + t * e[x];
    z2[x] = t * z0[x] - s * e[x];
  }
  center_originals(z1, n);
  center_originals(z2, n);
  Field psi1, psi2;
  psi1.values.resize(n);
  psi2.values.resize(n);
  for (int x = 0; x < n; ++x) {
    psi1.values[x] = s * z1[x] + zl.higher[x];
    psi2.values[x] = t * z2[x];
  }
  psi1.provenance = Provenance::split1;
  psi2.provenance = Provenance::split2;
  psi1.seed = psi2.seed = seed2;
  psi1.t = psi2.t = t;
  psi1.k_max = psi2.k_max = zl.k_max;
  return {std::move(psi1), std::move(psi2)};
}

SplitSample sample_split(const MidpointGraph& mg, int k_max, double t, std::uint64_t seed,
                         std::uint64_t index) {
  if (!(t >= 0.0 && t < 1.0)) throw InvalidArgument("t must lie in [0, 1)");
  if (k_max < 0) throw InvalidArgument("k_max must be nonnegative");
  const int n = mg.n_original();
  NormalSource src(seed, Stream::z_layers, index);
  std::vector<double> higher = higher_terms(mg, k_max, src, nullptr);
  NormalSource split(seed, Stream::split, index);
  std::vector<double> z1(mg.n_total()), z2(mg.n_total());
  draw_layer(mg, split, z1);
  draw_layer(mg, split, z2);
  center_originals(z1, n);
  center_originals(z2, n);
  const double s = std::sqrt(1.0 - t * t);
  SplitSample out;
  out.psi1.values.resize(n);
  out.psi2.values.resize(n);
  out.psi.values.resize(n);
  for (int x = 0; x < n; ++x) {
    out.psi1.values[x] = s * z1[x] + higher[x];
    out.psi2.values[x] = t * z2[x];
    out.psi.values[x] = out.psi1.values[x] + out.psi2.values[x];
  }
  out.psi1.provenance = Provenance::split1;
  out.psi2.provenance = Provenance::split2;
  out.psi.provenance = Provenance::sum;
  for (Field* f : {&out.psi1, &out.psi2, &out.psi}) {
    f->seed = seed;
    f->t = t;
    f->k_max = k_max;
  }
  return out;
}

std::vector<double> sample_bar_z2(const Graph& g, std::uint64_t seed, std::uint64_t index) {
  NormalSource src(seed, Stream::bar_z2, index);
  std::vector<double> z(g.n_vertices());
  const double sd = std::sqrt(0.5);
  for (double& v : z) v = sd * src();
  return z;
}

Field bar_psi2(std::span<const double> zbar, double t, std::uint64_t seed) {
  if (!(t >= 0.0 && t < 1.0)) throw InvalidArgument("t must lie in [0, 1)");
  Field f;
  f.values.assign(zbar.begin(), zbar.end());
  const int n = static_cast<int>(f.values.size());
  center_originals(f.values, n);
  for (double& v : f.values) v *= t;
  f.provenance = Provenance::bar2;
  f.seed = seed;
  f.t = t;
  return f;
}

Field sample_bar_psi2(const Graph& g, double t, std::uint64_t seed, std::uint64_t index) {
  return bar_psi2(sample_bar_z2(g, seed, index), t, seed);
}

Field add_fields(const Field& a, const Field& b) {
  if (a.values.size() != b.values.size()) throw InvalidArgument("field dimension mismatch");
  Field f = a;
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] += b.values[i];
  f.provenance = Provenance::sum;
  return f;
}

void write_field_csv(std::ostream& out, const Field& f) {
  out << "vertex,value\n" << std::setprecision(17);
  for (std::size_t i = 0; i < f.values.size(); ++i) out << i << ',' << f.values[i] << '\n';
}

void write_field_sidecar(std::ostream& out, const Field& f) {
  nlohmann::json j;
  j["provenance"] = to_string(f.provenance);
  j["seed"] = f.seed;
  j["t"] = f.t ? nlohmann::json(*f.t) : nlohmann::json(nullptr);
  j["k_max"] = f.k_max ? nlohmann::json(*f.k_max) : nlohmann::json(nullptr);
  out << j.dump(2) << '\n';
}

}  // namespace gffperc
