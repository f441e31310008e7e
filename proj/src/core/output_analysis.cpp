#include "plg/output_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plg/error.hpp"

namespace plg {

namespace {

double neumaier_sum(const Eigen::Ref<const Eigen::VectorXd>& x) {
  double sum = 0.0, c = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double t = sum + x(i);
    if (std::abs(sum) >= std::abs(x(i)))
      c += (sum - t) + x(i);
    else
      c += (x(i) - t) + sum;
    sum = t;
  }
  return sum + c;
}

bool constant_column(const Eigen::MatrixXd& draws, Eigen::Index j) {
  return draws.col(j).maxCoeff() == draws.col(j).minCoeff();
}

}  // namespace

Eigen::VectorXd monte_carlo_mean(const Eigen::MatrixXd& draws) {
  require(draws.rows() >= 1, ErrorCode::invalid_parameter, "empty chain");
  Eigen::VectorXd m(draws.cols());
  for (Eigen::Index j = 0; j < draws.cols(); ++j)
    m(j) = neumaier_sum(draws.col(j)) / static_cast<double>(draws.rows());
  return m;
}

long default_batch_size(long n) {
  return std::max(1L, static_cast<long>(std::floor(std::sqrt(static_cast<double>(n)))));
}

Eigen::MatrixXd batch_means_cov(const Eigen::MatrixXd& draws, long batch_size) {
  const long N = draws.rows();
  const long b = batch_size > 0 ? batch_size : default_batch_size(N);
  const long a = b > 0 ? N / b : 0;
  require(N >= 4 && a >= 2, ErrorCode::invalid_parameter,
          "batch means need at least two full batches (N >= 4)");
  const Eigen::Index d = draws.cols();
  Eigen::MatrixXd means(a, d);
  for (long k = 0; k < a; ++k)
    means.row(k) = monte_carlo_mean(draws.middleRows(k * b, b)).transpose();
  const Eigen::VectorXd grand = monte_carlo_mean(means);
  const Eigen::MatrixXd centered = means.rowwise() - grand.transpose();
  Eigen::MatrixXd cov = static_cast<double>(b) / static_cast<double>(a - 1) *
                        (centered.transpose() * centered);
  return 0.5 * (cov + cov.transpose());
}

Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& draws) {
  const long N = draws.rows();
  require(N >= 2, ErrorCode::invalid_parameter, "sample covariance needs two draws");
  const Eigen::VectorXd m = monte_carlo_mean(draws);
  const Eigen::MatrixXd c = draws.rowwise() - m.transpose();
  Eigen::MatrixXd cov = (c.transpose() * c) / static_cast<double>(N - 1);
  return 0.5 * (cov + cov.transpose());
}

Eigen::VectorXd univariate_ess(const Eigen::MatrixXd& draws, long batch_size) {
  const double N = static_cast<double>(draws.rows());
  const Eigen::MatrixXd sigma = batch_means_cov(draws, batch_size);
  const Eigen::MatrixXd lambda = sample_cov(draws);
  Eigen::VectorXd ess(draws.cols());
  for (Eigen::Index j = 0; j < draws.cols(); ++j) {
    if (constant_column(draws, j) || !(sigma(j, j) > 0.0))
      ess(j) = N;
    else
      ess(j) = N * lambda(j, j) / sigma(j, j);
  }
  return ess;
}

EssResult effective_sample_size(const Eigen::MatrixXd& draws, long batch_size) {
  const double N = static_cast<double>(draws.rows());
  const Eigen::Index d = draws.cols();
  EssResult r;
  std::vector<Eigen::Index> live;
  for (Eigen::Index j = 0; j < d; ++j)
    if (!constant_column(draws, j)) live.push_back(j);
  if (live.empty()) {
    r.value = N;
    r.degenerate = true;
    return r;
  }
  const Eigen::MatrixXd sigma = batch_means_cov(draws, batch_size);
  const Eigen::MatrixXd lambda = sample_cov(draws);
  if (static_cast<Eigen::Index>(live.size()) == d) {
    Eigen::LLT<Eigen::MatrixXd> ls(sigma), ll(lambda);
    if (ls.info() == Eigen::Success && ll.info() == Eigen::Success) {
      const double logdet_s = 2.0 * ls.matrixLLT().diagonal().array().log().sum();
      const double logdet_l = 2.0 * ll.matrixLLT().diagonal().array().log().sum();
      if (std::isfinite(logdet_s) && std::isfinite(logdet_l)) {
        r.value = N * std::exp((logdet_l - logdet_s) / static_cast<double>(d));
        return r;
      }
    }
  }
  r.fallback = true;
  double log_sum = 0.0;
  int count = 0;
  for (Eigen::Index j : live) {
    if (!(sigma(j, j) > 0.0)) continue;
    log_sum += std::log(N * lambda(j, j) / sigma(j, j));
    ++count;
  }
  r.value = count > 0 ? std::exp(log_sum / count) : N;
  return r;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  require(!sorted.empty(), ErrorCode::invalid_parameter, "quantile of an empty sample");
  require(q >= 0.0 && q <= 1.0, ErrorCode::invalid_parameter, "quantile level must be in [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

SummaryReport summarize(const Eigen::MatrixXd& draws, const std::vector<std::string>& labels) {
  const long N = draws.rows();
  require(N >= 1, ErrorCode::invalid_parameter, "empty chain");
  require(static_cast<Eigen::Index>(labels.size()) == draws.cols(), ErrorCode::invalid_parameter,
          "label count must equal the number of columns");
  SummaryReport rep;
  rep.n = N;
  const Eigen::VectorXd mean = monte_carlo_mean(draws);
  const bool batches = N >= 4;
  Eigen::VectorXd ess = Eigen::VectorXd::Constant(draws.cols(), static_cast<double>(N));
  if (batches) {
    rep.batch_size = default_batch_size(N);
    rep.batch_cov = batch_means_cov(draws);
    ess = univariate_ess(draws);
    rep.multivariate_ess = effective_sample_size(draws);
  } else {
    rep.multivariate_ess.value = static_cast<double>(N);
    rep.multivariate_ess.fallback = true;
  }
  for (Eigen::Index j = 0; j < draws.cols(); ++j) {
    ParameterSummary s;
    s.label = labels[j];
    s.mean = mean(j);
    std::vector<double> col(draws.col(j).data(), draws.col(j).data() + N);
    if (N > 1) {
      double ss = 0.0;
      for (double v : col) ss += (v - s.mean) * (v - s.mean);
      s.sd = std::sqrt(ss / static_cast<double>(N - 1));
    }
    std::sort(col.begin(), col.end());
    s.q025 = quantile_sorted(col, 0.025);
    s.q50 = quantile_sorted(col, 0.5);
    s.q975 = quantile_sorted(col, 0.975);
    s.degenerate = col.front() == col.back();
    if (batches) s.mcse = std::sqrt(std::max(0.0, rep.batch_cov(j, j)) / static_cast<double>(N));
    s.ess = ess(j);
    rep.parameters.push_back(std::move(s));
  }
  return rep;
}

}  // namespace plg

namespace plg {

MultiChainSummary between_within(const std::vector<Eigen::MatrixXd>& chains) {
  const std::size_t m = chains.size();
  require(m >= 2, ErrorCode::invalid_parameter, "between/within needs at least two chains");
  const Eigen::Index d = chains[0].cols();
  Eigen::Index N = chains[0].rows();
  for (const auto& c : chains) {
    require(c.cols() == d, ErrorCode::invalid_parameter, "chains differ in parameter count");
    N = std::min(N, c.rows());
  }
  require(N >= 2, ErrorCode::invalid_parameter, "between/within needs two draws per chain");
  MultiChainSummary s;
  s.chain_means.resize(static_cast<Eigen::Index>(m), d);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  for (std::size_t j = 0; j < m; ++j) {
    const Eigen::MatrixXd head = chains[j].topRows(N);
    s.chain_means.row(static_cast<Eigen::Index>(j)) = monte_carlo_mean(head).transpose();
    w += sample_cov(head).diagonal();
  }
  s.within = w / static_cast<double>(m);
  const Eigen::VectorXd grand = monte_carlo_mean(s.chain_means);
  const Eigen::MatrixXd c = s.chain_means.rowwise() - grand.transpose();
  s.between = static_cast<double>(N) / static_cast<double>(m - 1) * c.array().square().colwise().sum().transpose();
  s.psrf.resize(d);
  const double Nd = static_cast<double>(N);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double W = s.within(k);
    s.psrf(k) = W > 0.0 ? std::sqrt(((Nd - 1.0) / Nd * W + s.between(k) / Nd) / W)
                        : std::numeric_limits<double>::quiet_NaN();
  }
  return s;
}

}  // namespace plg
