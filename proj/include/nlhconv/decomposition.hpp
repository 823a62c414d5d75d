#pragma once

#include "nlhconv/complex_core.hpp"
#include "nlhconv/operator.hpp"

namespace nlhconv {

// Orthogonal splitting H1 = rge(A0) + rge(A1*) of an exact complex, carried as
// orthonormal bases of the two summands.  U = [Q0 | Q1] is unitary on H1.
class BlockDecomposition {
 public:
  BlockDecomposition(Matrix q0, Matrix q1);

  const Matrix& q0() const { return q0_; }
  const Matrix& q1() const { return q1_; }
  const Matrix& u() const { return u_; }
  Index r0() const { return q0_.cols(); }
  Index r1() const { return q1_.cols(); }
  Index dim() const { return u_.rows(); }

 private:
  Matrix q0_, q1_, u_;
};

BlockDecomposition build_decomposition(const HilbertComplex& c);

// 2x2 block form of an operator with respect to a BlockDecomposition.
struct BlockOperator {
  Matrix a00, a01, a10, a11;

  Index r0() const { return a00.rows(); }
  Index r1() const { return a11.rows(); }
  Matrix full() const;

  static BlockOperator identity(Index r0, Index r1);
  static BlockOperator from_full(const Matrix& m, Index r0);
};

BlockOperator block_multiply(const BlockOperator& x, const BlockOperator& y);

struct CoefficientBounds {
  double alpha = 1.0;
  double beta = 1.0;
};

struct MembershipReport {
  double min_real_eig_a00 = 0.0;       // floor of Re a00
  double min_real_eig_a00_inv = 0.0;   // floor of Re a00^{-1}
  double min_real_eig_inv11 = 0.0;     // floor of Re (a^{-1})_11
  double min_real_eig_inv11_inv = 0.0; // floor of Re ((a^{-1})_11)^{-1}
  double invertibility_margin = 0.0;   // smallest singular value of the full operator
  bool invertible = false;
  bool is_member = false;
  // Tightest admissible constants: the operator is a member for any
  // alpha <= best_alpha and beta >= best_beta (when both are finite/positive).
  double best_alpha = 0.0;
  double best_beta = 0.0;
};

std::pair<Vector, Vector> helmholtz_project(const BlockDecomposition& d, const Vector& q);

BlockOperator block_representation(const BlockDecomposition& d, const Operator& a);
Operator assemble_from_blocks(const BlockDecomposition& d, const BlockOperator& b);

struct SchurFactors {
  BlockOperator lower;     // unit lower block-triangular
  BlockOperator diagonal;  // diag(a00, a11 - a10 a00^{-1} a01)
  BlockOperator upper;     // unit upper block-triangular
};

SchurFactors schur_factorize(const BlockOperator& b);
BlockOperator block_inverse(const BlockOperator& b);

MembershipReport check_membership(const BlockDecomposition& d, const Operator& a,
                                  const CoefficientBounds& bounds);
MembershipReport check_membership_blocks(const BlockOperator& b, const CoefficientBounds& bounds);

// Orthonormal basis of the "harmonic gap" between a clamped and a free
// decomposition over the same space: the part of rge(A0_free) orthogonal to
// rge(A0_clamped).  Computed by principal angles between the two spans.
Matrix harmonic_subspace_V(const BlockDecomposition& d_clamped,
                           const BlockDecomposition& d_free);

}  // namespace nlhconv
