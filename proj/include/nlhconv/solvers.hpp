#pragma once

#include "nlhconv/decomposition.hpp"

#include <memory>

namespace nlhconv {

// Invertible reduction of a linear map C to coordinates on ker(C)^⊥ and
// rge(C).  basis_dom and basis_ran are produced by the same deterministic
// range computation as BlockDecomposition, so reducing A0 (resp. A1*) of a
// complex yields bases identical to the decomposition's Q0 (resp. Q1).
class ReducedOperator {
 public:
  explicit ReducedOperator(Matrix map);

  const Matrix& map() const { return map_; }
  const Matrix& basis_dom() const { return basis_dom_; }
  const Matrix& basis_ran() const { return basis_ran_; }
  const Matrix& matrix() const { return matrix_; }
  Index size() const { return matrix_.rows(); }

  // Coordinate solves with the cached factorization of the reduced matrix.
  Vector solve(const Vector& ran_coords) const;          // matrix x = rhs
  Vector solve_adjoint(const Vector& dom_coords) const;  // matrix^H x = rhs

 private:
  Matrix map_, basis_dom_, basis_ran_, matrix_;
  std::shared_ptr<const Eigen::PartialPivLU<Matrix>> lu_;
};

ReducedOperator reduce(const Matrix& c);

// Functional represented through the range of the reduced map:
// f(phi) = <g, C phi>.  Carried as the ambient vector g in rge(C) together
// with its basis_ran coordinates.
struct RangeFunctional {
  Vector g;       // ambient representative, inside span(basis_ran)
  Vector coords;  // basis_ran^H g
};

// Wrap an ambient vector already lying in rge(C); vectors with a component
// outside the range (relative to 1e-12) are rejected.
RangeFunctional functional_from_range_vector(const ReducedOperator& r, const Vector& g_ambient);

// Convert a raw right-hand side f (a vector on the domain space, pairing
// f(phi) = <f_raw, phi>) into its range representation by inverting the
// transposed reduction.  f_raw must live on ker(C)^⊥; anything else has no
// range representation and is rejected.
RangeFunctional functional_from_raw(const ReducedOperator& r, const Vector& f_raw);

struct VariationalSolution {
  Vector u;         // solution coordinates lifted to the ambient domain space
  Vector flux;      // a C u (primal) or a^{-1} C v (dual), ambient on H1
  double residual;  // max over reduced test directions of the defect pairing
};

// Find u on ker(A0)^⊥ with <a A0 u, A0 phi> = <g, A0 phi> for all phi.
VariationalSolution solve_primal(const BlockDecomposition& d, const ReducedOperator& r0,
                                 const Operator& a, const RangeFunctional& f);

// Find v on ker(A1*)^⊥ with <a^{-1} A1* v, A1* psi> = <g, A1* psi> for all psi.
// Solved through the complement identity ((a^{-1})_11)^{-1} = a11 - a10 a00^{-1} a01
// and cross-checked against the directly compressed inverse; disagreement
// beyond 1e-10 aborts the solve.
VariationalSolution solve_dual(const BlockDecomposition& d, const ReducedOperator& r1,
                               const Operator& a, const RangeFunctional& g);

// Multi-right-hand-side solve of the compressed leading block:
// (Q0^H a Q0) X = rhs.  Uses the projected-inverse shortcut when a has a fast
// inverse and the complement is the smaller summand; otherwise materializes
// the block and factorizes it once for all columns.
Matrix solve_leading_block(const BlockDecomposition& d, const Operator& a, const Matrix& rhs);

}  // namespace nlhconv
