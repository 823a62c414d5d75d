#include "nlhconv/operator.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>

namespace nlhconv {

namespace {

// Eigen's rcond() estimate is unreliable when a pivot is exactly zero, so the
// solve paths also gate on the pivot spread of the factorization.
void require_solvable(const Eigen::PartialPivLU<Matrix>& lu, const char* what) {
  const auto piv = lu.matrixLU().diagonal().cwiseAbs();
  if (piv.size() == 0) return;
  const double pmin = piv.minCoeff();
  const double pmax = piv.maxCoeff();
  if (!(pmin > 1e-14 * std::max(pmax, 1e-300)) || !(lu.rcond() > 1e-14))
    throw SingularError(what);
}

}  // namespace

Operator Operator::identity(Index n) { return diagonal(Vector::Ones(n)); }

Operator Operator::diagonal(Vector d) {
  Operator op;
  op.kind_ = Kind::Diagonal;
  op.size_ = d.size();
  op.diag_ = std::move(d);
  return op;
}

Operator Operator::dense(Matrix m) {
  if (m.rows() != m.cols()) throw DimensionError("dense operator must be square");
  Operator op;
  op.kind_ = Kind::Dense;
  op.size_ = m.rows();
  op.mat_ = std::move(m);
  return op;
}

Operator Operator::toeplitz(Vector first_col, Vector first_row) {
  if (first_col.size() != first_row.size())
    throw DimensionError("toeplitz column/row length mismatch");
  if (first_col.size() > 0 &&
      std::abs(first_col(0) - first_row(0)) > 1e-14 * (1.0 + std::abs(first_col(0))))
    throw DimensionError("toeplitz column and row must agree at the corner");
  Operator op;
  op.kind_ = Kind::Toeplitz;
  op.size_ = first_col.size();
  op.tcol_ = std::move(first_col);
  op.trow_ = std::move(first_row);
  return op;
}

Matrix Operator::apply(const Matrix& x) const {
  if (x.rows() != size_) throw DimensionError("operator apply: size mismatch");
  switch (kind_) {
    case Kind::Diagonal:
      return diag_.asDiagonal() * x;
    case Kind::Dense:
      return mat_ * x;
    case Kind::Toeplitz:
      return toeplitz_apply_fft(x);
  }
  throw Error("unreachable");
}

Vector Operator::apply(const Vector& x) const {
  return Vector(apply(Matrix(x)));
}

Matrix Operator::apply_adjoint(const Matrix& x) const {
  switch (kind_) {
    case Kind::Diagonal:
      return diag_.conjugate().asDiagonal() * x;
    case Kind::Dense:
      return mat_.adjoint() * x;
    case Kind::Toeplitz:
      return adjoint().apply(x);
  }
  throw Error("unreachable");
}

bool Operator::has_fast_inverse() const {
  if (kind_ != Kind::Diagonal) return false;
  return diag_.size() == 0 || diag_.cwiseAbs().minCoeff() > 1e-300;
}

Matrix Operator::apply_inverse(const Matrix& x) const {
  if (x.rows() != size_) throw DimensionError("operator solve: size mismatch");
  if (kind_ == Kind::Diagonal) {
    if (!has_fast_inverse()) throw SingularError("diagonal operator has a vanishing entry");
    return diag_.cwiseInverse().asDiagonal() * x;
  }
  Matrix d = to_dense();
  Eigen::PartialPivLU<Matrix> lu(d);
  require_solvable(lu, "operator numerically singular in solve");
  return lu.solve(x);
}

Vector Operator::apply_inverse(const Vector& x) const {
  return Vector(apply_inverse(Matrix(x)));
}

Matrix Operator::to_dense() const {
  switch (kind_) {
    case Kind::Diagonal:
      return Matrix(diag_.asDiagonal());
    case Kind::Dense:
      return mat_;
    case Kind::Toeplitz: {
      Matrix m(size_, size_);
      for (Index i = 0; i < size_; ++i)
        for (Index j = 0; j < size_; ++j) m(i, j) = i >= j ? tcol_(i - j) : trow_(j - i);
      return m;
    }
  }
  throw Error("unreachable");
}

Operator Operator::adjoint() const {
  switch (kind_) {
    case Kind::Diagonal:
      return diagonal(diag_.conjugate());
    case Kind::Dense:
      return dense(mat_.adjoint());
    case Kind::Toeplitz:
      return toeplitz(trow_.conjugate(), tcol_.conjugate());
  }
  throw Error("unreachable");
}

Operator Operator::inverse() const {
  if (kind_ == Kind::Diagonal) {
    if (!has_fast_inverse()) throw SingularError("diagonal operator has a vanishing entry");
    return diagonal(diag_.cwiseInverse());
  }
  Matrix d = to_dense();
  Eigen::PartialPivLU<Matrix> lu(d);
  require_solvable(lu, "operator numerically singular in inverse");
  return dense(lu.solve(Matrix::Identity(size_, size_)));
}

Operator Operator::scaled(Complex s) const {
  switch (kind_) {
    case Kind::Diagonal:
      return diagonal(s * diag_);
    case Kind::Dense:
      return dense(s * mat_);
    case Kind::Toeplitz:
      return toeplitz(s * tcol_, s * trow_);
  }
  throw Error("unreachable");
}

Operator Operator::shifted(Complex s) const {
  switch (kind_) {
    case Kind::Diagonal:
      return diagonal(diag_.array() + s);
    case Kind::Dense: {
      Matrix m = mat_;
      m.diagonal().array() += s;
      return dense(std::move(m));
    }
    case Kind::Toeplitz: {
      Vector c = tcol_, r = trow_;
      c(0) += s;
      r(0) += s;
      return toeplitz(std::move(c), std::move(r));
    }
  }
  throw Error("unreachable");
}

Operator Operator::add(const Operator& a, const Operator& b) {
  if (a.size() != b.size()) throw DimensionError("operator sum: size mismatch");
  if (a.kind() == Kind::Diagonal && b.kind() == Kind::Diagonal)
    return diagonal(a.diag_ + b.diag_);
  if (a.kind() == Kind::Toeplitz && b.kind() == Kind::Toeplitz)
    return toeplitz(a.tcol_ + b.tcol_, a.trow_ + b.trow_);
  if (a.kind() == Kind::Diagonal && a.diag_.size() > 0 &&
      (a.diag_.array() - a.diag_(0)).abs().maxCoeff() == 0.0 && b.kind() == Kind::Toeplitz)
    return b.shifted(a.diag_(0));
  if (b.kind() == Kind::Diagonal && b.diag_.size() > 0 &&
      (b.diag_.array() - b.diag_(0)).abs().maxCoeff() == 0.0 && a.kind() == Kind::Toeplitz)
    return a.shifted(b.diag_(0));
  return dense(a.to_dense() + b.to_dense());
}

Operator Operator::block_diag(const Operator& a, const Operator& b) {
  if (a.kind() == Kind::Diagonal && b.kind() == Kind::Diagonal) {
    Vector d(a.size() + b.size());
    d.head(a.size()) = a.diag_;
    d.tail(b.size()) = b.diag_;
    return diagonal(std::move(d));
  }
  Matrix m = Matrix::Zero(a.size() + b.size(), a.size() + b.size());
  m.topLeftCorner(a.size(), a.size()) = a.to_dense();
  m.bottomRightCorner(b.size(), b.size()) = b.to_dense();
  return dense(std::move(m));
}

double Operator::norm_estimate() const {
  if (size_ == 0) return 0.0;
  if (kind_ == Kind::Diagonal) return diag_.cwiseAbs().maxCoeff();
  Matrix d = to_dense();
  Eigen::BDCSVD<Matrix> svd(d);
  return svd.singularValues()(0);
}

double Operator::min_real_part() const {
  if (size_ == 0) return std::numeric_limits<double>::infinity();
  if (kind_ == Kind::Diagonal) return diag_.real().minCoeff();
  Matrix d = to_dense();
  Matrix h = 0.5 * (d + d.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

const Vector& Operator::diagonal_values() const {
  if (kind_ != Kind::Diagonal) throw DimensionError("operator is not diagonal");
  return diag_;
}

Matrix Operator::toeplitz_apply_fft(const Matrix& x) const {
  const Index n = size_;
  if (n == 0) return Matrix(0, x.cols());
  Index len = 1;
  while (len < 2 * n) len <<= 1;
  // Circulant embedding: first column is [col; 0...; row(n-1..1)].
  std::vector<Complex> c(static_cast<size_t>(len), Complex(0, 0));
  for (Index i = 0; i < n; ++i) c[static_cast<size_t>(i)] = tcol_(i);
  for (Index i = 1; i < n; ++i) c[static_cast<size_t>(len - i)] = trow_(i);
  Eigen::FFT<double> fft;
  std::vector<Complex> chat;
  fft.fwd(chat, c);
  Matrix out(n, x.cols());
  std::vector<Complex> buf(static_cast<size_t>(len)), bhat, prod(static_cast<size_t>(len)),
      res;
  for (Index j = 0; j < x.cols(); ++j) {
    std::fill(buf.begin(), buf.end(), Complex(0, 0));
    for (Index i = 0; i < n; ++i) buf[static_cast<size_t>(i)] = x(i, j);
    fft.fwd(bhat, buf);
    for (Index i = 0; i < len; ++i)
      prod[static_cast<size_t>(i)] = chat[static_cast<size_t>(i)] * bhat[static_cast<size_t>(i)];
    fft.inv(res, prod);
    for (Index i = 0; i < n; ++i) out(i, j) = res[static_cast<size_t>(i)];
  }
  return out;
}

}  // namespace nlhconv
