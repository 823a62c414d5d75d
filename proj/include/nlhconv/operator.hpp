#pragma once

#include "nlhconv/types.hpp"

#include <optional>

namespace nlhconv {

// Square linear operator on a coefficient space, carried in a structured form
// so that diagonal (multiplication) and Toeplitz (convolution) operators are
// exactly representable and never materialized densely unless requested.
class Operator {
 public:
  enum class Kind { Diagonal, Dense, Toeplitz };

  Operator() = default;

  static Operator identity(Index n);
  static Operator diagonal(Vector d);
  static Operator dense(Matrix m);
  // Toeplitz operator from its first column and first row; col(0) == row(0).
  static Operator toeplitz(Vector first_col, Vector first_row);

  Kind kind() const { return kind_; }
  Index size() const { return size_; }

  Matrix apply(const Matrix& x) const;
  Vector apply(const Vector& x) const;
  Matrix apply_adjoint(const Matrix& x) const;

  // True when the inverse can be applied without materializing the operator.
  bool has_fast_inverse() const;
  Matrix apply_inverse(const Matrix& x) const;
  Vector apply_inverse(const Vector& x) const;

  Matrix to_dense() const;

  Operator adjoint() const;
  Operator inverse() const;
  Operator scaled(Complex s) const;
  Operator shifted(Complex s) const;  // this + s * identity
  static Operator add(const Operator& a, const Operator& b);
  // Block diagonal operator on the concatenation of the two spaces.
  static Operator block_diag(const Operator& a, const Operator& b);

  double norm_estimate() const;
  double min_real_part() const;  // min over diagonal entries; dense: field of values floor

  const Vector& diagonal_values() const;
  const Vector& toeplitz_col() const { return tcol_; }
  const Vector& toeplitz_row() const { return trow_; }

 private:
  Kind kind_ = Kind::Dense;
  Index size_ = 0;
  Vector diag_;
  Matrix mat_;
  Vector tcol_, trow_;

  Matrix toeplitz_apply_fft(const Matrix& x) const;
};

}  // namespace nlhconv
