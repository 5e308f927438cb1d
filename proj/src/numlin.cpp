#include "sdjls/numlin.hpp"

#include <array>
#include <cmath>

namespace sdjls {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw NonFiniteError(std::string(what) + ": non-finite input");
}

// Pade coefficients b_0..b_m for the [m/m] approximant of exp.
constexpr std::array<double, 4> kPade3 = {120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPade5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kPade7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                          25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kPade9 = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0,
                                           30270240.0,    2162160.0,    110880.0,     3960.0,
                                           90.0,          1.0};
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

// Largest 1-norms for which each degree meets unit roundoff in double.
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

template <std::size_t K>
Matrix pade_low(const Matrix& A, const std::array<double, K>& b) {
  // Degree m = K - 1 in {3, 5, 7, 9}; powers are A^2, A^4, ...
  const Eigen::Index n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix A2 = A * A;
  Matrix odd = b[1] * I;
  Matrix even = b[0] * I;
  Matrix power = I;
  for (std::size_t k = 2; k < K; k += 2) {
    power = power * A2;
    even += b[k] * power;
    if (k + 1 < K) odd += b[k + 1] * power;
  }
  const Matrix U = A * odd;
  return (even - U).partialPivLu().solve(even + U);
}

Matrix pade13(const Matrix& A) {
  const auto& b = kPade13;
  const Eigen::Index n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix A2 = A * A;
  const Matrix A4 = A2 * A2;
  const Matrix A6 = A4 * A2;
  const Matrix U =
      A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
  const Matrix V =
      A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
  return (V - U).partialPivLu().solve(V + U);
}

}  // namespace

SymMatrix::SymMatrix(Eigen::Index dim) : dim_(dim), packed_(packed_size(dim), 0.0) {}

SymMatrix SymMatrix::from_dense(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatchError("SymMatrix: matrix is not square");
  SymMatrix s(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i; j < m.cols(); ++j) s(i, j) = m(i, j);
  return s;
}

SymMatrix SymMatrix::identity(Eigen::Index dim) {
  SymMatrix s(dim);
  for (Eigen::Index i = 0; i < dim; ++i) s(i, i) = 1.0;
  return s;
}

SymMatrix SymMatrix::from_svec(Eigen::Index dim, std::span<const double> v) {
  if (static_cast<Eigen::Index>(v.size()) != packed_size(dim)) {
    throw DimensionMismatchError("SymMatrix::from_svec: wrong length");
  }
  SymMatrix s(dim);
  std::size_t p = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    s.packed_[p] = v[p];
    ++p;
    for (Eigen::Index j = i + 1; j < dim; ++j, ++p) s.packed_[p] = v[p] / kSqrt2;
  }
  return s;
}

Matrix SymMatrix::dense() const {
  Matrix m(dim_, dim_);
  for (Eigen::Index i = 0; i < dim_; ++i)
    for (Eigen::Index j = i; j < dim_; ++j) m(i, j) = m(j, i) = (*this)(i, j);
  return m;
}

Vector SymMatrix::svec() const {
  Vector v(packed_.size());
  svec_into({v.data(), packed_.size()});
  return v;
}

void SymMatrix::svec_into(std::span<double> out) const {
  std::size_t p = 0;
  for (Eigen::Index i = 0; i < dim_; ++i) {
    out[p] = packed_[p];
    ++p;
    for (Eigen::Index j = i + 1; j < dim_; ++j, ++p) out[p] = packed_[p] * kSqrt2;
  }
}

SymEigen eig_sym(const Matrix& symmetric) {
  require_finite(symmetric, "eig_sym");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NoConvergenceError("eig_sym: iteration cap exceeded");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

SymEigen eig_sym(const SymMatrix& s) { return eig_sym(s.dense()); }

double min_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const Matrix sym = 0.5 * (m + m.transpose());
  require_finite(sym, "min_eigenvalue");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NoConvergenceError("min_eigenvalue: no convergence");
  return solver.eigenvalues()(0);
}

double max_eigenvalue(const Matrix& m) { return -min_eigenvalue(-m); }

SymMatrix clip_eigenvalues(const SymMatrix& s, double floor) {
  const SymEigen e = eig_sym(s);
  const Vector clipped = e.values.cwiseMax(floor);
  return SymMatrix::from_dense(e.vectors * clipped.asDiagonal() * e.vectors.transpose());
}

SymMatrix psd_project(const SymMatrix& s) { return clip_eigenvalues(s, 0.0); }

Matrix expm(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatchError("expm: matrix is not square");
  require_finite(m, "expm");
  const Eigen::Index n = m.rows();
  if (n == 0) return m;
  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  if (norm1 <= kTheta3) return pade_low(m, kPade3);
  if (norm1 <= kTheta5) return pade_low(m, kPade5);
  if (norm1 <= kTheta7) return pade_low(m, kPade7);
  if (norm1 <= kTheta9) return pade_low(m, kPade9);

  const int s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / kTheta13))));
  Matrix r = pade13(std::ldexp(1.0, -s) * m);
  for (int k = 0; k < s; ++k) r = r * r;
  if (!r.allFinite()) throw NonFiniteError("expm: overflow");
  return r;
}

Vector expm_apply(const Matrix& A, double t, const Vector& v) {
  if (!std::isfinite(t)) throw NonFiniteError("expm_apply: non-finite duration");
  if (t < 0.0) throw Error("expm_apply: negative duration");
  require_finite(v, "expm_apply");
  if (A.cols() != v.size()) throw DimensionMismatchError("expm_apply: dimension mismatch");
  if (t == 0.0) return v;
  return expm(A * t) * v;
}

LstsqResult lstsq(const Matrix& M, const Vector& b) {
  require_finite(M, "lstsq");
  require_finite(b, "lstsq");
  if (M.rows() != b.size()) throw DimensionMismatchError("lstsq: rows of M must match b");
  if (M.rows() == 0 || M.cols() == 0) return {Vector::Zero(M.cols()), b.norm()};
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(M);
  Vector x = cod.solve(b);
  return {x, (M * x - b).norm()};
}

}  // namespace sdjls
