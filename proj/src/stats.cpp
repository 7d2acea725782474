#include "gffperc/stats.hpp"

#include <algorithm>
#include <cmath>

#include "gffperc/errors.hpp"

namespace gffperc {

CovarianceAccumulator::CovarianceAccumulator(int dim)
    : sum_(Eigen::VectorXd::Zero(dim)), outer_(Eigen::MatrixXd::Zero(dim, dim)) {}

void CovarianceAccumulator::add(std::span<const double> x) {
  Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
  sum_ += v;
  outer_.selfadjointView<Eigen::Lower>().rankUpdate(v);
  ++count_;
}

void CovarianceAccumulator::merge(const CovarianceAccumulator& other) {
  sum_ += other.sum_;
  outer_ += other.outer_;
  count_ += other.count_;
}

Eigen::VectorXd CovarianceAccumulator::mean() const { return sum_ / static_cast<double>(count_); }

Eigen::MatrixXd CovarianceAccumulator::covariance() const {
  if (count_ < 2) throw InvalidArgument("covariance needs at least two samples");
  Eigen::MatrixXd full = outer_.selfadjointView<Eigen::Lower>();
  Eigen::VectorXd m = mean();
  return (full - static_cast<double>(count_) * m * m.transpose()) / static_cast<double>(count_ - 1);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("KS test needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  const double ne = na * nb / (na + nb);
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double p = 0.0;
  if (lambda < 0.2) {
    p = 1.0;
  } else {
    for (int k = 1; k <= 100; ++k) {
      double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
      p += term;
      if (std::abs(term) < 1e-12) break;
    }
  }
  return {d, std::clamp(p, 0.0, 1.0)};
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  const double mx = sample_mean(x), my = sample_mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

double sample_mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  const double m = sample_mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

double correlation(std::span<const double> x, std::span<const double> y) {
  const double mx = sample_mean(x), my = sample_mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace gffperc
