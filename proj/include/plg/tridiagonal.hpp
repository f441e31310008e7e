#pragma once

#include <Eigen/Dense>

namespace plg {

/// Symmetric tridiagonal matrix stored as its main diagonal and first
/// off-diagonal. A diagonal matrix is the special case of an all-zero
/// off-diagonal.
class SymTridiagonal {
 public:
  SymTridiagonal() = default;
  SymTridiagonal(Eigen::VectorXd diag, Eigen::VectorXd off);
  static SymTridiagonal diagonal(Eigen::VectorXd diag);

  Eigen::Index size() const { return diag_.size(); }
  const Eigen::VectorXd& diag() const { return diag_; }
  const Eigen::VectorXd& off() const { return off_; }

  Eigen::MatrixXd dense() const;
  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
  double quadratic_form(const Eigen::VectorXd& x) const;

  /// Determinant by the three-term continuant recurrence.
  double determinant() const;
  double log_determinant() const;

  /// Lower bidiagonal Cholesky factor: returns false when a pivot is not
  /// strictly positive. On success `l_diag`/`l_sub` hold L with A = L L^T.
  bool cholesky(Eigen::VectorXd& l_diag, Eigen::VectorXd& l_sub) const;

  /// Solves A x = b for SPD A. Throws decomposition-failure otherwise.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;

  /// Draws u ~ N(0, A^{-1}) given standard normals z (u = L^{-T} z).
  Eigen::VectorXd sample_inverse_covariance(const Eigen::VectorXd& z) const;

 private:
  Eigen::VectorXd diag_;
  Eigen::VectorXd off_;
};

}  // namespace plg
