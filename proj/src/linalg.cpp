#include "nlhconv/linalg.hpp"

#include <random>

namespace nlhconv {

namespace {

// The divide-and-conquer SVD in the vendored Eigen release can return
// corrupted singular *vectors* for complex matrices with tightly clustered
// singular values (the structured difference stencils here hit that case),
// while its singular *values* stay accurate.  Every vector-producing path
// below therefore verifies its output and falls back to the slow but
// unconditionally reliable one-sided Jacobi SVD when verification fails.

RealVector singular_values(const Matrix& m) {
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues();
}

Index rank_from_values(const RealVector& s, double rel_tol) {
  if (s.size() == 0 || !(s(0) > 0.0)) return 0;
  const double cut = rel_tol * s(0);
  Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return r;
}

// Cheap randomized check that u * diag(sigma) * v^H reproduces m.
bool factorization_ok(const Matrix& m, const Matrix& u, const RealVector& sigma,
                      const Matrix& v) {
  const double scale = sigma.size() > 0 ? std::max(sigma(0), 1e-300) : 1e-300;
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int probe = 0; probe < 3; ++probe) {
    Vector x(m.cols());
    for (Index i = 0; i < x.size(); ++i) x(i) = Complex(dist(rng), dist(rng));
    const Vector lhs = m * x;
    const Vector rhs = u * (sigma.cast<Complex>().asDiagonal() * (v.adjoint() * x));
    if (max_abs(Vector(lhs - rhs)) > 1e-11 * scale * x.norm()) return false;
  }
  return true;
}

}  // namespace

Index svd_rank(const Matrix& m, double rel_tol) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  return rank_from_values(singular_values(m), rel_tol);
}

Matrix phase_fix_columns(Matrix q) {
  for (Index l = 0; l < q.cols(); ++l) {
    Index idx = 0;
    q.col(l).cwiseAbs().maxCoeff(&idx);
    const Complex pivot = q(idx, l);
    const double mag = std::abs(pivot);
    if (mag > 0) q.col(l) *= std::conj(pivot) / mag;
  }
  return q;
}

RangeBasis range_basis(const Matrix& m, double rel_tol) {
  RangeBasis out;
  if (m.rows() == 0 || m.cols() == 0) {
    out.q = Matrix(m.rows(), 0);
    out.sigma = RealVector(0);
    out.v = Matrix(m.cols(), 0);
    return out;
  }
  Eigen::BDCSVD<Matrix> fast(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Matrix u = fast.matrixU();
  RealVector s = fast.singularValues();
  Matrix v = fast.matrixV();
  if (!factorization_ok(m, u, s, v)) {
    Eigen::JacobiSVD<Matrix> slow(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = slow.matrixU();
    s = slow.singularValues();
    v = slow.matrixV();
  }
  const Index r = rank_from_values(s, rel_tol);
  out.q = u.leftCols(r);
  out.sigma = s.head(r);
  out.v = v.leftCols(r);
  for (Index l = 0; l < r; ++l) {
    Index idx = 0;
    out.q.col(l).cwiseAbs().maxCoeff(&idx);
    const Complex pivot = out.q(idx, l);
    const double mag = std::abs(pivot);
    if (mag > 0) {
      const Complex c = std::conj(pivot) / mag;
      out.q.col(l) *= c;
      out.v.col(l) *= c;
    }
  }
  return out;
}

Matrix range_space(const Matrix& m, double rel_tol) {
  if (m.rows() == 0 || m.cols() == 0) return Matrix(m.rows(), 0);
  const RealVector s = singular_values(m);
  const Index r = rank_from_values(s, rel_tol);
  if (r == 0) return Matrix(m.rows(), 0);

  // Column-pivoted QR yields an orthonormal basis of the column space without
  // touching the fragile singular-vector path; the rank split is taken from
  // the (reliable) singular values and verified by the projection residual.
  Eigen::ColPivHouseholderQR<Matrix> qr(m);
  Matrix q = Matrix(qr.householderQ()).leftCols(r);
  const Matrix residual = m - q * (q.adjoint() * m);
  const double floor = r < s.size() ? s(r) : 0.0;
  if (max_abs(residual) <= std::max(1e-11 * s(0), 16.0 * floor))
    return phase_fix_columns(std::move(q));
  return range_basis(m, rel_tol).q;
}

Matrix orth_columns(const Matrix& m, double rel_tol) {
  return range_space(m, rel_tol);
}

double min_singular_value(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  return singular_values(m).minCoeff();
}

double min_real_eigenvalue(const Matrix& m) {
  if (m.rows() == 0) return std::numeric_limits<double>::infinity();
  Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double operator_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  return singular_values(m)(0);
}

}  // namespace nlhconv
