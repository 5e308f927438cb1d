#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sdjls/errors.hpp"

namespace sdjls {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Symmetric matrix stored as its packed upper triangle (row by row).
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Eigen::Index dim);

  /// Reads the upper triangle of m; the lower triangle is ignored.
  static SymMatrix from_dense(const Matrix& m);
  static SymMatrix identity(Eigen::Index dim);
  /// Inverse of svec().
  static SymMatrix from_svec(Eigen::Index dim, std::span<const double> v);

  Eigen::Index dim() const { return dim_; }
  static Eigen::Index packed_size(Eigen::Index dim) { return dim * (dim + 1) / 2; }

  double operator()(Eigen::Index i, Eigen::Index j) const { return packed_[index(i, j)]; }
  double& operator()(Eigen::Index i, Eigen::Index j) { return packed_[index(i, j)]; }

  std::span<const double> packed() const { return packed_; }
  Matrix dense() const;

  /// Packed entries with off-diagonals scaled by sqrt(2), so that the
  /// Euclidean norm of svec equals the Frobenius norm of the matrix.
  Vector svec() const;
  void svec_into(std::span<double> out) const;

 private:
  Eigen::Index index(Eigen::Index i, Eigen::Index j) const {
    if (i > j) std::swap(i, j);
    return i * dim_ - i * (i - 1) / 2 + (j - i);
  }

  Eigen::Index dim_ = 0;
  std::vector<double> packed_;
};

struct SymEigen {
  Vector values;   // ascending
  Matrix vectors;  // orthonormal columns
};

/// Symmetric eigendecomposition S = V diag(values) V'.
SymEigen eig_sym(const SymMatrix& s);
SymEigen eig_sym(const Matrix& symmetric);

/// Smallest eigenvalue of the symmetric part of m.
double min_eigenvalue(const Matrix& m);
double max_eigenvalue(const Matrix& m);

/// Frobenius-nearest PSD matrix: negative eigenvalues clipped to zero.
SymMatrix psd_project(const SymMatrix& s);

/// Eigenvalues clipped from below at `floor` (floor = 0 is psd_project).
SymMatrix clip_eigenvalues(const SymMatrix& s, double floor);

/// e^{M} by scaling and squaring with Pade approximants of degree 3..13.
Matrix expm(const Matrix& m);

/// e^{At} v. Requires t >= 0 and finite inputs.
Vector expm_apply(const Matrix& A, double t, const Vector& v);

struct LstsqResult {
  Vector x;         // minimum-norm minimizer of |Mx - b|
  double residual;  // |Mx - b|
};

LstsqResult lstsq(const Matrix& M, const Vector& b);

}  // namespace sdjls
