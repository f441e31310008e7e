#pragma once

#include <Eigen/Dense>

#include "plg/rng.hpp"
#include "plg/tridiagonal.hpp"

namespace plg {

/// Inverse-Gaussian(mean, shape): density proportional to
/// x^{-3/2} exp(-shape (x - mean)^2 / (2 mean^2 x)).
double sample_inverse_gaussian(double mean, double shape, RngStream& rng);

/// Inverse-Gamma(shape, rate): density proportional to x^{-shape-1} exp(-rate/x).
double sample_inverse_gamma(double shape, double rate, RngStream& rng);

/// Gamma(shape, rate): density proportional to x^{shape-1} exp(-rate x).
double sample_gamma(double shape, double rate, RngStream& rng);

enum class GaussianMethod { cholesky, fast_np };

/// Draw from N(A^{-1} X'y, sigma2 A^{-1}) with A = X'X + precision, by a
/// dense Cholesky factorization of A. One jitter retry on factorization loss.
Eigen::VectorXd sample_gaussian_regression_conditional(const Eigen::MatrixXd& xtx,
                                                       const Eigen::VectorXd& xty,
                                                       const SymTridiagonal& precision,
                                                       double sigma2, RngStream& rng);

/// Same target, O(n^2 p) route for p >> n: only the n x n system
/// (X S X' + I) w = y/sigma - X u - delta is factorized, S = precision^{-1}.
Eigen::VectorXd sample_gaussian_regression_conditional_np(const Eigen::MatrixXd& X,
                                                          const Eigen::VectorXd& y,
                                                          const SymTridiagonal& precision,
                                                          double sigma2, RngStream& rng);

}  // namespace plg
