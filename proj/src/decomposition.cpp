#include "nlhconv/decomposition.hpp"

#include "nlhconv/linalg.hpp"

#include <cmath>
#include <limits>

namespace nlhconv {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

BlockDecomposition::BlockDecomposition(Matrix q0, Matrix q1)
    : q0_(std::move(q0)), q1_(std::move(q1)) {
  if (q0_.rows() != q1_.rows())
    throw DimensionError("decomposition bases live on different spaces");
  u_.resize(q0_.rows(), q0_.cols() + q1_.cols());
  u_.leftCols(q0_.cols()) = q0_;
  u_.rightCols(q1_.cols()) = q1_;
}

BlockDecomposition build_decomposition(const HilbertComplex& c) {
  const ComplexReport rep = verify_complex(c);
  if (!rep.is_exact)
    throw DecompositionError("complex is not exact; orthogonal splitting unavailable",
                             rep.cohomology_dim);
  Matrix q0 = c.dim_h0() > 0 ? range_space(c.a0()) : Matrix(c.dim_h1(), 0);
  Matrix q1 = c.dim_h2() > 0 ? range_space(Matrix(c.a1().adjoint())) : Matrix(c.dim_h1(), 0);
  if (q0.cols() + q1.cols() != c.dim_h1())
    throw DecompositionError("range bases do not fill the middle space",
                             c.dim_h1() - q0.cols() - q1.cols());
  if (q0.cols() > 0 && q1.cols() > 0 && max_abs(Matrix(q0.adjoint() * q1)) > kAlgebraicTol)
    throw DecompositionError("range bases are not orthogonal", rep.cohomology_dim);
  return BlockDecomposition(std::move(q0), std::move(q1));
}

Matrix BlockOperator::full() const {
  Matrix m(r0() + r1(), r0() + r1());
  m.topLeftCorner(r0(), r0()) = a00;
  m.topRightCorner(r0(), r1()) = a01;
  m.bottomLeftCorner(r1(), r0()) = a10;
  m.bottomRightCorner(r1(), r1()) = a11;
  return m;
}

BlockOperator BlockOperator::identity(Index r0, Index r1) {
  return BlockOperator{Matrix::Identity(r0, r0), Matrix::Zero(r0, r1), Matrix::Zero(r1, r0),
                       Matrix::Identity(r1, r1)};
}

BlockOperator BlockOperator::from_full(const Matrix& m, Index r0) {
  if (m.rows() != m.cols()) throw DimensionError("block split of non-square matrix");
  if (r0 < 0 || r0 > m.rows()) throw DimensionError("block split point out of range");
  const Index r1 = m.rows() - r0;
  return BlockOperator{m.topLeftCorner(r0, r0), m.topRightCorner(r0, r1),
                       m.bottomLeftCorner(r1, r0), m.bottomRightCorner(r1, r1)};
}

BlockOperator block_multiply(const BlockOperator& x, const BlockOperator& y) {
  if (x.r0() != y.r0() || x.r1() != y.r1())
    throw DimensionError("block product: shape mismatch");
  return BlockOperator{x.a00 * y.a00 + x.a01 * y.a10, x.a00 * y.a01 + x.a01 * y.a11,
                       x.a10 * y.a00 + x.a11 * y.a10, x.a10 * y.a01 + x.a11 * y.a11};
}

std::pair<Vector, Vector> helmholtz_project(const BlockDecomposition& d, const Vector& q) {
  if (q.size() != d.dim()) throw DimensionError("projection input size mismatch");
  Vector q0 = d.q0() * (d.q0().adjoint() * q);
  Vector q1 = d.q1() * (d.q1().adjoint() * q);
  return {std::move(q0), std::move(q1)};
}

BlockOperator block_representation(const BlockDecomposition& d, const Operator& a) {
  if (a.size() != d.dim()) throw DimensionError("operator size does not match decomposition");
  const Matrix au = a.apply(d.u());
  const Matrix w = d.u().adjoint() * au;
  return BlockOperator::from_full(w, d.r0());
}

Operator assemble_from_blocks(const BlockDecomposition& d, const BlockOperator& b) {
  if (b.r0() != d.r0() || b.r1() != d.r1())
    throw DimensionError("block sizes do not match decomposition");
  return Operator::dense(d.u() * b.full() * d.u().adjoint());
}

namespace {

// Invertibility of a dense block with a relative singular value margin.
bool invertible_with_margin(const Matrix& m, double* sigma_min = nullptr) {
  if (m.rows() == 0) {
    if (sigma_min) *sigma_min = kInf;
    return true;
  }
  Eigen::BDCSVD<Matrix> svd(m);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (sigma_min) *sigma_min = smin;
  return smin > kRankRelTol * std::max(smax, 1e-300);
}

Matrix dense_inverse(const Matrix& m, const char* what) {
  if (m.rows() == 0) return m;
  if (!invertible_with_margin(m)) throw SingularError(what);
  Eigen::PartialPivLU<Matrix> lu(m);
  return lu.solve(Matrix::Identity(m.rows(), m.cols()));
}

}  // namespace

SchurFactors schur_factorize(const BlockOperator& b) {
  const Index r0 = b.r0(), r1 = b.r1();
  if (!invertible_with_margin(b.a00))
    throw SingularError("leading block is singular; no triangular factorization");
  const Matrix a00_inv = dense_inverse(b.a00, "leading block is singular");
  const Matrix schur = b.a11 - b.a10 * a00_inv * b.a01;
  SchurFactors f{BlockOperator::identity(r0, r1), BlockOperator::identity(r0, r1),
                 BlockOperator::identity(r0, r1)};
  f.lower.a10 = b.a10 * a00_inv;
  f.diagonal.a00 = b.a00;
  f.diagonal.a11 = schur;
  f.upper.a01 = a00_inv * b.a01;
  return f;
}

BlockOperator block_inverse(const BlockOperator& b) {
  const Matrix a00_inv = dense_inverse(b.a00, "leading block is singular");
  const Matrix schur = b.a11 - b.a10 * a00_inv * b.a01;
  const Matrix schur_inv = dense_inverse(schur, "complement block is singular");
  BlockOperator inv;
  inv.a00 = a00_inv + a00_inv * b.a01 * schur_inv * b.a10 * a00_inv;
  inv.a01 = -a00_inv * b.a01 * schur_inv;
  inv.a10 = -schur_inv * b.a10 * a00_inv;
  inv.a11 = schur_inv;
  return inv;
}

MembershipReport check_membership_blocks(const BlockOperator& b,
                                         const CoefficientBounds& bounds) {
  MembershipReport rep;
  const Matrix full = b.full();
  rep.invertible = invertible_with_margin(full, &rep.invertibility_margin);

  rep.min_real_eig_a00 = min_real_eigenvalue(b.a00);
  if (b.r0() == 0) {
    rep.min_real_eig_a00_inv = kInf;
  } else if (invertible_with_margin(b.a00)) {
    rep.min_real_eig_a00_inv = min_real_eigenvalue(dense_inverse(b.a00, "unreachable"));
  } else {
    rep.min_real_eig_a00_inv = -kInf;
  }

  if (b.r1() == 0) {
    rep.min_real_eig_inv11 = kInf;
    rep.min_real_eig_inv11_inv = kInf;
  } else if (rep.invertible) {
    const Matrix inv11 =
        dense_inverse(full, "unreachable").bottomRightCorner(b.r1(), b.r1());
    rep.min_real_eig_inv11 = min_real_eigenvalue(inv11);
    if (invertible_with_margin(inv11)) {
      rep.min_real_eig_inv11_inv = min_real_eigenvalue(dense_inverse(inv11, "unreachable"));
    } else {
      rep.min_real_eig_inv11_inv = -kInf;
    }
  } else {
    rep.min_real_eig_inv11 = -kInf;
    rep.min_real_eig_inv11_inv = -kInf;
  }

  const double tol = kAlgebraicTol;
  rep.is_member = rep.invertible &&
                  rep.min_real_eig_a00 >= bounds.alpha - tol &&
                  rep.min_real_eig_a00_inv >= 1.0 / bounds.beta - tol &&
                  rep.min_real_eig_inv11 >= 1.0 / bounds.beta - tol &&
                  rep.min_real_eig_inv11_inv >= bounds.alpha - tol;

  rep.best_alpha = std::min(rep.min_real_eig_a00, rep.min_real_eig_inv11_inv);
  const double floor_inv = std::min(rep.min_real_eig_a00_inv, rep.min_real_eig_inv11);
  rep.best_beta = floor_inv > 0.0 ? 1.0 / floor_inv : kInf;
  return rep;
}

MembershipReport check_membership(const BlockDecomposition& d, const Operator& a,
                                  const CoefficientBounds& bounds) {
  if (bounds.alpha <= 0.0 || bounds.beta <= 0.0)
    throw PreconditionError("coefficient bounds must be positive");
  return check_membership_blocks(block_representation(d, a), bounds);
}

Matrix harmonic_subspace_V(const BlockDecomposition& d_clamped,
                           const BlockDecomposition& d_free) {
  if (d_clamped.dim() != d_free.dim())
    throw DimensionError("decompositions live on different spaces");
  if (d_free.r0() == 0) return Matrix(d_free.dim(), 0);

  // A free-range direction q = Q0_free y lies inside the complement of the
  // clamped range exactly when its clamped-range component vanishes, i.e.
  // (Q0_clamped^H Q0_free) y = 0.  The cosine-threshold criterion on the
  // principal angles (cos >= 1 - tol towards the complement) translates to a
  // sine bound on the small cross-Gram matrix.
  const Matrix cross = d_clamped.q0().adjoint() * d_free.q0();
  const double sine_cut = std::sqrt(std::max(0.0, 1.0 - (1.0 - kAlgebraicTol) * (1.0 - kAlgebraicTol)));
  Matrix coeff;
  if (cross.rows() == 0) {
    coeff = Matrix::Identity(d_free.r0(), d_free.r0());
  } else {
    // Right singular vectors with singular value below the sine bound span
    // the admissible coefficient space.  The cross-Gram matrix is small, so
    // the unconditionally reliable SVD is affordable here.
    Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullV);
    const RealVector& s = svd.singularValues();
    Index first_null = 0;
    while (first_null < s.size() && s(first_null) > sine_cut) ++first_null;
    const Index nullity = d_free.r0() - first_null;
    coeff = svd.matrixV().rightCols(nullity);
  }
  return phase_fix_columns(d_free.q0() * coeff);
}

}  // namespace nlhconv
