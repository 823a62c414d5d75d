#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace nlhconv {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Relative singular value threshold for ranks and range bases.
inline constexpr double kRankRelTol = 1e-10;
// Agreement tolerance for exact algebraic identities (factorizations, inverses).
inline constexpr double kAlgebraicTol = 1e-10;
// Zero tolerance for compositions and representation roundtrips.
inline constexpr double kZeroTol = 1e-12;
// Default probe-limit tolerance in the two-scale regime at n_max = 64.
inline constexpr double kProbeTol = 5e-2;

// Inner product, linear in the first argument: <x, y> = sum_i x_i conj(y_i).
inline Complex inner(const Vector& x, const Vector& y) { return y.dot(x); }

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Incompatible shapes between operators, spaces or bases.
struct DimensionError : Error {
  using Error::Error;
};

// Input outside the admissible set (degenerate cell, vanishing real part, ...).
struct DegenerateInputError : Error {
  using Error::Error;
};

// A checked mathematical precondition failed (coercivity, invertibility, ...).
struct PreconditionError : Error {
  using Error::Error;
};

// The generalized decomposition does not exist (non-exact complex).
struct DecompositionError : Error {
  DecompositionError(const std::string& what, Index cohomology)
      : Error(what), cohomology_dim(cohomology) {}
  Index cohomology_dim = 0;
};

// Singular pivot block or singular operator where an inverse is required.
struct SingularError : Error {
  using Error::Error;
};

// Bad experiment configuration or CLI usage.
struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace nlhconv
