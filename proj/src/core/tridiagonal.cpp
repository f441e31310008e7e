#include "plg/tridiagonal.hpp"

#include <cmath>

#include "plg/error.hpp"

namespace plg {

SymTridiagonal::SymTridiagonal(Eigen::VectorXd diag, Eigen::VectorXd off)
    : diag_(std::move(diag)), off_(std::move(off)) {
  const Eigen::Index p = diag_.size();
  require(p >= 1, ErrorCode::invalid_parameter, "tridiagonal matrix must have size >= 1");
  require(off_.size() == p - 1, ErrorCode::invalid_parameter,
          "off-diagonal length must be size - 1");
}

SymTridiagonal SymTridiagonal::diagonal(Eigen::VectorXd diag) {
  const Eigen::Index p = diag.size();
  return SymTridiagonal(std::move(diag), Eigen::VectorXd::Zero(p > 0 ? p - 1 : 0));
}

Eigen::MatrixXd SymTridiagonal::dense() const {
  const Eigen::Index p = size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
  m.diagonal() = diag_;
  for (Eigen::Index i = 0; i + 1 < p; ++i) {
    m(i, i + 1) = off_(i);
    m(i + 1, i) = off_(i);
  }
  return m;
}

Eigen::VectorXd SymTridiagonal::multiply(const Eigen::VectorXd& x) const {
  const Eigen::Index p = size();
  Eigen::VectorXd out = diag_.cwiseProduct(x);
  for (Eigen::Index i = 0; i + 1 < p; ++i) {
    out(i) += off_(i) * x(i + 1);
    out(i + 1) += off_(i) * x(i);
  }
  return out;
}

double SymTridiagonal::quadratic_form(const Eigen::VectorXd& x) const {
  return x.dot(multiply(x));
}

double SymTridiagonal::determinant() const {
  // f_k = a_k f_{k-1} - b_{k-1}^2 f_{k-2}, f_0 = 1, f_{-1} = 0
  double prev = 1.0;
  double cur = diag_(0);
  for (Eigen::Index k = 1; k < size(); ++k) {
    const double next = diag_(k) * cur - off_(k - 1) * off_(k - 1) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double SymTridiagonal::log_determinant() const {
  Eigen::VectorXd ld, ls;
  if (!cholesky(ld, ls)) fail(ErrorCode::decomposition_failure, "log_determinant: matrix is not SPD");
  return 2.0 * ld.array().log().sum();
}

bool SymTridiagonal::cholesky(Eigen::VectorXd& l_diag, Eigen::VectorXd& l_sub) const {
  const Eigen::Index p = size();
  l_diag.resize(p);
  l_sub.resize(p > 0 ? p - 1 : 0);
  double pivot = diag_(0);
  for (Eigen::Index i = 0; i < p; ++i) {
    if (i > 0) {
      l_sub(i - 1) = off_(i - 1) / l_diag(i - 1);
      pivot = diag_(i) - l_sub(i - 1) * l_sub(i - 1);
    }
    if (!(pivot > 0.0) || !std::isfinite(pivot)) return false;
    l_diag(i) = std::sqrt(pivot);
  }
  return true;
}

Eigen::VectorXd SymTridiagonal::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd ld, ls;
  if (!cholesky(ld, ls)) fail(ErrorCode::decomposition_failure, "tridiagonal solve: matrix is not SPD");
  const Eigen::Index p = size();
  Eigen::VectorXd x(p);
  // forward: L z = b
  for (Eigen::Index i = 0; i < p; ++i) {
    double v = b(i);
    if (i > 0) v -= ls(i - 1) * x(i - 1);
    x(i) = v / ld(i);
  }
  // backward: L^T x = z
  for (Eigen::Index i = p - 1; i >= 0; --i) {
    double v = x(i);
    if (i + 1 < p) v -= ls(i) * x(i + 1);
    x(i) = v / ld(i);
  }
  return x;
}

Eigen::MatrixXd SymTridiagonal::solve(const Eigen::MatrixXd& b) const {
  Eigen::MatrixXd out(b.rows(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) out.col(j) = solve(Eigen::VectorXd(b.col(j)));
  return out;
}

Eigen::VectorXd SymTridiagonal::sample_inverse_covariance(const Eigen::VectorXd& z) const {
  Eigen::VectorXd ld, ls;
  if (!cholesky(ld, ls)) fail(ErrorCode::decomposition_failure, "prior draw: precision is not SPD");
  const Eigen::Index p = size();
  Eigen::VectorXd u(p);
  for (Eigen::Index i = p - 1; i >= 0; --i) {
    double v = z(i);
    if (i + 1 < p) v -= ls(i) * u(i + 1);
    u(i) = v / ld(i);
  }
  return u;
}

}  // namespace plg
