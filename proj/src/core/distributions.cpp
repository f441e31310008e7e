#include "plg/distributions.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "plg/error.hpp"

namespace plg {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

Eigen::VectorXd standard_normals(Eigen::Index k, RngStream& rng) {
  Eigen::VectorXd z(k);
  for (Eigen::Index i = 0; i < k; ++i) z(i) = rng.normal();
  return z;
}

}  // namespace

double sample_inverse_gaussian(double mean, double shape, RngStream& rng) {
  require(positive_finite(mean) && positive_finite(shape), ErrorCode::invalid_parameter,
          "inverse-Gaussian parameters must be positive and finite");
  const double z = rng.normal();
  const double y = z * z;
  // x = mean * (1 + r - sqrt(r^2 + 2r)) rewritten without cancellation.
  const double r = (mean / (2.0 * shape)) * y;
  const double root = r > 1.0 ? r * std::sqrt(1.0 + 2.0 / r) : std::sqrt(r * r + 2.0 * r);
  double x = mean / (1.0 + r + root);
  if (!(x > 0.0) || !std::isfinite(x)) x = shape / y;  // large-mean limit
  if (rng.uniform() <= mean / (mean + x)) return x;
  const double other = mean * (1.0 + r + root);
  return std::isfinite(other) ? other : std::numeric_limits<double>::max();
}

double sample_gamma(double shape, double rate, RngStream& rng) {
  require(positive_finite(shape) && positive_finite(rate), ErrorCode::invalid_parameter,
          "gamma parameters must be positive and finite");
  std::gamma_distribution<double> g(shape, 1.0 / rate);
  double v = g(rng);
  // shape << 1 can underflow to zero
  if (!(v > 0.0)) v = std::numeric_limits<double>::denorm_min();
  return v;
}

double sample_inverse_gamma(double shape, double rate, RngStream& rng) {
  require(positive_finite(shape) && positive_finite(rate), ErrorCode::invalid_parameter,
          "inverse-gamma parameters must be positive and finite");
  std::gamma_distribution<double> g(shape, 1.0);
  double v = g(rng);
  if (!(v > 0.0)) v = std::numeric_limits<double>::denorm_min();
  const double x = rate / v;
  return std::isfinite(x) ? x : std::numeric_limits<double>::max();
}

Eigen::VectorXd sample_gaussian_regression_conditional(const Eigen::MatrixXd& xtx,
                                                       const Eigen::VectorXd& xty,
                                                       const SymTridiagonal& precision,
                                                       double sigma2, RngStream& rng) {
  const Eigen::Index p = xtx.rows();
  require(xtx.cols() == p && xty.size() == p && precision.size() == p,
          ErrorCode::invalid_parameter, "Gaussian conditional: dimension mismatch");
  require(positive_finite(sigma2), ErrorCode::invalid_parameter, "sigma2 must be positive");

  Eigen::MatrixXd A = xtx;
  A.diagonal() += precision.diag();
  for (Eigen::Index i = 0; i + 1 < p; ++i) {
    A(i, i + 1) += precision.off()(i);
    A(i + 1, i) += precision.off()(i);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    const double jitter = 1e-10 * A.trace() / static_cast<double>(p);
    A.diagonal().array() += jitter;
    llt.compute(A);
    if (llt.info() != Eigen::Success || !(jitter > 0.0))
      fail(ErrorCode::decomposition_failure, "X'X + prior precision is not positive definite");
  }
  const Eigen::VectorXd mean = llt.solve(xty);
  const Eigen::VectorXd z = standard_normals(p, rng);
  Eigen::VectorXd noise = llt.matrixU().solve(z);
  return mean + std::sqrt(sigma2) * noise;
}

Eigen::VectorXd sample_gaussian_regression_conditional_np(const Eigen::MatrixXd& X,
                                                          const Eigen::VectorXd& y,
                                                          const SymTridiagonal& precision,
                                                          double sigma2, RngStream& rng) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  require(y.size() == n && precision.size() == p, ErrorCode::invalid_parameter,
          "Gaussian conditional: dimension mismatch");
  require(positive_finite(sigma2), ErrorCode::invalid_parameter, "sigma2 must be positive");
  const double sigma = std::sqrt(sigma2);

  const Eigen::VectorXd u = precision.sample_inverse_covariance(standard_normals(p, rng));
  const Eigen::VectorXd delta = standard_normals(n, rng);
  const Eigen::MatrixXd SXt = precision.solve(Eigen::MatrixXd(X.transpose()));  // p x n
  Eigen::MatrixXd M = X * SXt;
  M.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) {
    M.diagonal().array() += 1e-10 * M.trace() / static_cast<double>(n);
    llt.compute(M);
    if (llt.info() != Eigen::Success)
      fail(ErrorCode::decomposition_failure, "X S X' + I is not positive definite");
  }
  const Eigen::VectorXd w = llt.solve(y / sigma - X * u - delta);
  return sigma * (u + SXt * w);
}

}  // namespace plg
