#pragma once

#include "nlhconv/types.hpp"

namespace nlhconv {

// Rank with the relative singular value threshold rel_tol * sigma_max.
Index svd_rank(const Matrix& m, double rel_tol = kRankRelTol);

// Thin singular triplet of the kept (above-threshold) part, with the column
// phases of q fixed deterministically: the largest-magnitude entry of each
// column is made real and positive, and v is rotated to match.
struct RangeBasis {
  Matrix q;        // orthonormal basis of the range, one column per kept sigma
  RealVector sigma;
  Matrix v;        // corresponding right singular vectors
};
RangeBasis range_basis(const Matrix& m, double rel_tol = kRankRelTol);

// Deterministic phase normalization of an orthonormal column family.
Matrix phase_fix_columns(Matrix q);

// Orthonormal basis of the column space alone (no singular triplet), computed
// by a rank-revealing QR with the rank pinned by singular values; cheaper and
// more robust than range_basis when only the subspace is needed.
Matrix range_space(const Matrix& m, double rel_tol = kRankRelTol);

// Orthonormal basis of the column span, dropping directions below rel_tol.
Matrix orth_columns(const Matrix& m, double rel_tol = 1e-8);

// Smallest singular value (0 for empty matrices).
double min_singular_value(const Matrix& m);

// Smallest eigenvalue of the Hermitian part (+inf for empty matrices).
double min_real_eigenvalue(const Matrix& m);

// Operator 2-norm.
double operator_norm(const Matrix& m);

}  // namespace nlhconv
