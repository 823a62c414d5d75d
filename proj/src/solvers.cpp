#include "nlhconv/solvers.hpp"

#include "nlhconv/linalg.hpp"

namespace nlhconv {

ReducedOperator::ReducedOperator(Matrix map) : map_(std::move(map)) {
  basis_dom_ = range_space(Matrix(map_.adjoint()));
  basis_ran_ = range_space(map_);
  matrix_ = basis_ran_.adjoint() * map_ * basis_dom_;
  if (matrix_.rows() != matrix_.cols())
    throw Error("reduction produced a non-square matrix");  // unreachable for finite maps
  if (matrix_.rows() > 0) {
    Eigen::BDCSVD<Matrix> svd(matrix_);
    const auto& s = svd.singularValues();
    if (!(s.minCoeff() > kRankRelTol * std::max(s.maxCoeff(), 1e-300)))
      throw SingularError("reduced matrix is numerically singular");
  }
  lu_ = std::make_shared<Eigen::PartialPivLU<Matrix>>(matrix_);
}

ReducedOperator reduce(const Matrix& c) { return ReducedOperator(c); }

Vector ReducedOperator::solve(const Vector& ran_coords) const {
  if (ran_coords.size() != size()) throw DimensionError("reduced solve: size mismatch");
  return lu_->solve(ran_coords);
}

Vector ReducedOperator::solve_adjoint(const Vector& dom_coords) const {
  if (dom_coords.size() != size()) throw DimensionError("reduced solve: size mismatch");
  return lu_->adjoint().solve(dom_coords);
}

RangeFunctional functional_from_range_vector(const ReducedOperator& r, const Vector& g_ambient) {
  if (g_ambient.size() != r.basis_ran().rows())
    throw DimensionError("functional vector size mismatch");
  Vector coords = r.basis_ran().adjoint() * g_ambient;
  const Vector inside = r.basis_ran() * coords;
  const double out = max_abs(Vector(g_ambient - inside));
  if (out > kZeroTol * std::max(1.0, g_ambient.norm()))
    throw PreconditionError("functional vector has a component outside the range");
  return RangeFunctional{inside, std::move(coords)};
}

RangeFunctional functional_from_raw(const ReducedOperator& r, const Vector& f_raw) {
  if (f_raw.size() != r.basis_dom().rows())
    throw DimensionError("raw functional size mismatch");
  const Vector dom_coords = r.basis_dom().adjoint() * f_raw;
  const Vector inside = r.basis_dom() * dom_coords;
  const double out = max_abs(Vector(f_raw - inside));
  if (out > kZeroTol * std::max(1.0, f_raw.norm()))
    throw PreconditionError(
        "raw functional has a component on the kernel; no range representation exists");
  // f(phi) = <f_raw, phi> = <g, C phi> forces matrix^H coords(g) = dom_coords.
  Vector coords(dom_coords.size());
  if (coords.size() > 0) coords = r.solve_adjoint(dom_coords);
  RangeFunctional f;
  f.g = r.basis_ran() * coords;
  f.coords = std::move(coords);
  return f;
}

Matrix solve_leading_block(const BlockDecomposition& d, const Operator& a, const Matrix& rhs) {
  if (a.size() != d.dim()) throw DimensionError("operator size does not match decomposition");
  if (rhs.rows() != d.r0()) throw DimensionError("leading-block solve: rhs size mismatch");
  if (d.r0() == 0) return rhs;

  if (a.has_fast_inverse() && d.r1() <= d.r0()) {
    // Projected-inverse route: for each column r, find w = a^{-1}(Q0 r + Q1 z)
    // with Q1^H w = 0; then x = Q0^H w solves (Q0^H a Q0) x = r.
    const Matrix ainv_q1 = a.apply_inverse(d.q1());
    const Matrix small = d.q1().adjoint() * ainv_q1;  // (a^{-1})_11
    Eigen::PartialPivLU<Matrix> lu(small);
    const Matrix ainv_q0_rhs = a.apply_inverse(Matrix(d.q0() * rhs));
    const Matrix z = lu.solve(Matrix(-(d.q1().adjoint() * ainv_q0_rhs)));
    return d.q0().adjoint() * (ainv_q0_rhs + ainv_q1 * z);
  }

  const Matrix a00 = d.q0().adjoint() * a.apply(d.q0());
  Eigen::PartialPivLU<Matrix> lu(a00);
  const auto piv = lu.matrixLU().diagonal().cwiseAbs();
  if (!(piv.minCoeff() > 1e-14 * std::max(piv.maxCoeff(), 1e-300)))
    throw SingularError("compressed leading block is numerically singular");
  return lu.solve(rhs);
}

namespace {

// Coercivity gate for the compressed blocks.  The cheap sufficient condition
// (positive real-part floor of the whole operator) avoids a large Hermitian
// eigensolve on the common path; the exact compressed check runs only when
// the operator itself is indefinite.
void require_positive_a00(const BlockDecomposition& d, const Operator& a) {
  if (d.r0() == 0) return;
  if (a.min_real_part() > kZeroTol) return;
  const Matrix a00 = d.q0().adjoint() * a.apply(d.q0());
  const double floor = min_real_eigenvalue(a00);
  if (!(floor > kZeroTol))
    throw PreconditionError("compressed leading block is not uniformly positive; floor = " +
                            std::to_string(floor));
}

double reduced_residual(const ReducedOperator& r, const Vector& flux, const Vector& g) {
  if (r.size() == 0) return 0.0;
  const Vector defect = r.matrix().adjoint() * (r.basis_ran().adjoint() * (flux - g));
  return max_abs(defect);
}

}  // namespace

VariationalSolution solve_primal(const BlockDecomposition& d, const ReducedOperator& r0,
                                 const Operator& a, const RangeFunctional& f) {
  if (r0.basis_ran().rows() != d.dim() || r0.size() != d.r0())
    throw DimensionError("reduction does not match the decomposition");
  require_positive_a00(d, a);

  // c-coordinates of the flux on rge(A0): (Q0^H a Q0) c = coords(g).
  const Vector c = d.r0() > 0 ? Vector(solve_leading_block(d, a, Matrix(f.coords)).col(0))
                              : Vector(0);
  const Vector x = r0.size() > 0 ? r0.solve(c) : Vector(0);

  VariationalSolution sol;
  sol.u = r0.basis_dom() * x;
  sol.flux = a.apply(Vector(d.q0() * c));
  sol.residual = reduced_residual(r0, sol.flux, f.g);
  return sol;
}

VariationalSolution solve_dual(const BlockDecomposition& d, const ReducedOperator& r1,
                               const Operator& a, const RangeFunctional& g) {
  if (r1.basis_ran().rows() != d.dim() || r1.size() != d.r1())
    throw DimensionError("reduction does not match the decomposition");
  if (a.size() != d.dim()) throw DimensionError("operator size does not match decomposition");

  // Directly compressed inverse: (a^{-1})_11 = Q1^H a^{-1} Q1.
  const Matrix ainv_q1 = a.apply_inverse(d.q1());
  const Matrix inv11 = d.q1().adjoint() * ainv_q1;

  if (!(a.min_real_part() > kZeroTol)) {
    const double floor = min_real_eigenvalue(inv11);
    if (!(floor > kZeroTol))
      throw PreconditionError("compressed inverse block is not uniformly positive; floor = " +
                              std::to_string(floor));
  }

  // Route one: multiply by the complement identity ((a^{-1})_11)^{-1}
  // = a11 - a10 a00^{-1} a01 — no inversion of the compressed inverse needed.
  const Matrix a_q1 = a.apply(d.q1());
  const Matrix a11 = d.q1().adjoint() * a_q1;
  const Matrix a01 = d.q0().adjoint() * a_q1;
  const Matrix a10 = d.q1().adjoint() * a.apply(d.q0());
  Vector c_schur;
  if (d.r0() > 0) {
    const Matrix a00inv_a01 = solve_leading_block(d, a, a01);
    c_schur = (a11 - a10 * a00inv_a01) * g.coords;
  } else {
    c_schur = a11 * g.coords;
  }

  // Route two: solve with the compressed inverse directly.
  Eigen::PartialPivLU<Matrix> lu(inv11);
  const auto piv = lu.matrixLU().diagonal().cwiseAbs();
  if (!(piv.minCoeff() > 1e-14 * std::max(piv.maxCoeff(), 1e-300)))
    throw SingularError("compressed inverse block is numerically singular");
  const Vector c_direct = lu.solve(g.coords);

  const double scale = std::max({max_abs(c_schur), max_abs(c_direct), 1.0});
  if (max_abs(Vector(c_schur - c_direct)) > 1e-10 * scale)
    throw Error("complement-identity and direct solves disagree beyond tolerance");

  const Vector x = r1.size() > 0 ? r1.solve(c_direct) : Vector(0);

  VariationalSolution sol;
  sol.u = r1.basis_dom() * x;
  sol.flux = a.apply_inverse(Vector(d.q1() * c_direct));
  sol.residual = reduced_residual(r1, sol.flux, g.g);
  return sol;
}

}  // namespace nlhconv
