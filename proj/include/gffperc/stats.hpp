#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gffperc {

/// Running mean and covariance of fixed-length vectors.
class CovarianceAccumulator {
 public:
  explicit CovarianceAccumulator(int dim);
  void add(std::span<const double> x);
  /// Merges another accumulator (used to combine per-thread partial sums).
  void merge(const CovarianceAccumulator& other);
  long count() const { return count_; }
  Eigen::VectorXd mean() const;
  /// Unbiased sample covariance.
  Eigen::MatrixXd covariance() const;

 private:
  long count_ = 0;
  Eigen::VectorXd sum_;
  Eigen::MatrixXd outer_;
};

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov law.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Ordinary least squares slope and intercept of y on x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

double sample_mean(std::span<const double> x);
double sample_variance(std::span<const double> x);
double correlation(std::span<const double> x, std::span<const double> y);

}  // namespace gffperc
