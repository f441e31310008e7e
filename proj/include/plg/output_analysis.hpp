#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace plg {

/// Column means with compensated (Neumaier) summation.
Eigen::VectorXd monte_carlo_mean(const Eigen::MatrixXd& draws);

/// Default batch size floor(sqrt(N)).
long default_batch_size(long n);

/// Non-overlapping batch-means estimate of the asymptotic covariance of the
/// column means. Needs at least two full batches.
Eigen::MatrixXd batch_means_cov(const Eigen::MatrixXd& draws, long batch_size = 0);

/// Sample covariance with divisor N - 1.
Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& draws);

struct EssResult {
  double value = 0.0;
  bool degenerate = false;  // every column constant: value is N
  bool fallback = false;    // covariance singular: per-coordinate fallback used
};

/// Multivariate ESS N (det Lambda / det Sigma)^{1/d}. When either matrix is
/// singular, falls back to the geometric mean of the per-coordinate ESS over
/// the non-constant columns.
EssResult effective_sample_size(const Eigen::MatrixXd& draws, long batch_size = 0);

/// Per-column N lambda_i^2 / sigma_i^2; constant columns get N.
Eigen::VectorXd univariate_ess(const Eigen::MatrixXd& draws, long batch_size = 0);

/// Type-7 quantile of an ascending-sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double q);

struct ParameterSummary {
  std::string label;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0, q50 = 0.0, q975 = 0.0;
  std::optional<double> mcse;  // absent with fewer than four draws
  double ess = 0.0;
  bool degenerate = false;
};

struct SummaryReport {
  long n = 0;
  long batch_size = 0;
  std::vector<ParameterSummary> parameters;
  Eigen::MatrixXd batch_cov;  // empty with fewer than four draws
  EssResult multivariate_ess;
};

SummaryReport summarize(const Eigen::MatrixXd& draws, const std::vector<std::string>& labels);

}  // namespace plg

namespace plg {

/// Between/within-chain comparison of column means for m >= 2 chains.
struct MultiChainSummary {
  Eigen::MatrixXd chain_means;  // chains x parameters
  Eigen::VectorXd between;      // B = N/(m-1) sum (mean_j - mean)^2
  Eigen::VectorXd within;       // W = average within-chain variance
  Eigen::VectorXd psrf;         // NaN where W = 0
};

MultiChainSummary between_within(const std::vector<Eigen::MatrixXd>& chains);

}  // namespace plg
